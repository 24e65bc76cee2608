import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqwave.bem import (
    BoundarySpaces,
    CalderonAssembler,
    QuadratureOptions,
    assemble_calderon,
    assemble_V,
)
from cqwave.mesh import generate_disk

from oracles import circle_rayleigh, circle_symbol, projector_residual


@pytest.fixture(scope="module")
def circle32():
    sp = BoundarySpaces.circle(1.0, 32)
    return sp, CalderonAssembler(sp)


def test_space_matrices(circle32):
    sp, _ = circle32
    n = sp.M2
    one = np.ones(n)
    perimeter = sp.lengths.sum()
    assert one @ sp.mass_p1() @ one == pytest.approx(perimeter)
    assert one @ sp.mass_p0p1() @ one == pytest.approx(perimeter)
    np.testing.assert_allclose(sp.arclength_derivative() @ one, 0.0, atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(sp.normals, axis=1), 1.0)
    assert np.all(np.einsum("ij,ij->i", sp.normals, sp.midpoints) > 0)


def test_from_mesh_matches_boundary():
    m = generate_disk(2.0, 1)
    sp = BoundarySpaces.from_mesh(m)
    assert sp.M2 == m.n_boundary_edges == sp.M3
    np.testing.assert_array_equal(sp.nodes, m.vertices[sp.mesh_vertex])


def test_too_few_panels():
    with pytest.raises(ValueError):
        BoundarySpaces.from_polygon([[0, 0], [1, 0]])


def _self_panel_reference(L, s):
    # int_0^L int_0^L K0(s|u - v|) / (2 pi) = (1 / pi) int_0^L (L - r) K0(s r) dr
    return complex(mpmath.quad(lambda r: (L - r) * mpmath.besselk(0, s * r), [0, L]) / mpmath.pi)


@pytest.mark.parametrize("s", [1.0, 2 + 5j, 30.0])
def test_self_panel_entry(s):
    sp = BoundarySpaces.circle(1.0, 16)
    V = CalderonAssembler(sp).single_layer(s)
    assert V[3, 3] == pytest.approx(_self_panel_reference(sp.lengths[3], s), rel=1e-9)




def _adjacent_reference(sp, s, kernel):
    """Panels 0 and 1 share ``P = ends[0] = starts[1]``; ``x = P - u e0``, ``y = P + v e1``.

    Duffy substitution on both triangles of the unit square moves the log
    singularity to a single edge; arithmetic stays in mpmath.
    """
    P = [mpmath.mpf(float(c)) for c in sp.ends[0]]
    e0 = [mpmath.mpf(float(c)) for c in sp.ends[0] - sp.starts[0]]
    e1 = [mpmath.mpf(float(c)) for c in sp.ends[1] - sp.starts[1]]
    scale = mpmath.mpf(float(sp.lengths[0])) * mpmath.mpf(float(sp.lengths[1]))

    def F(u, v):
        d = (-u * e0[0] - v * e1[0], -u * e0[1] - v * e1[1])
        return kernel(d, mpmath.sqrt(d[0] ** 2 + d[1] ** 2))

    with mpmath.workdps(25):
        val = mpmath.quad(lambda a, t: a * (F(a, a * t) + F(a * t, a)), [0, 1], [0, 1])
    return complex(val * scale)


def test_adjacent_panel_entries():
    sp = BoundarySpaces.circle(1.0, 12)
    s = 1.5 + 1j
    asm = CalderonAssembler(sp)
    V = asm.single_layer(s)
    nu = [mpmath.mpf(float(c)) for c in sp.normals[1]]

    def g(d, r):
        return mpmath.besselk(0, s * r) / (2 * mpmath.pi)

    def dg(d, r):
        return s / (2 * mpmath.pi) * mpmath.besselk(1, s * r) * (d[0] * nu[0] + d[1] * nu[1]) / r

    ref = _adjacent_reference(sp, s, g)
    # default orders are good to a few 1e-9 on touching pairs; escalated ones two digits better
    assert V[0, 1] == pytest.approx(ref, rel=5e-9)
    Ve = CalderonAssembler(sp, QuadratureOptions().escalated()).single_layer(s)
    assert Ve[0, 1] == pytest.approx(ref, rel=1e-10)
    # K with p1 trial: column of node 1 collects both panels touching it; check the p0 x p0 analogue
    t = asm.tensors(s)
    assert t.D[0, 1].sum() == pytest.approx(_adjacent_reference(sp, s, dg), rel=1e-8, abs=1e-12)


def test_regular_pair_against_dense_gauss():
    sp = BoundarySpaces.circle(1.0, 24)
    s = 3 + 4j
    V = CalderonAssembler(sp).single_layer(s)
    from numpy.polynomial.legendre import leggauss
    from scipy.special import kv

    x, w = leggauss(60)
    u, wu = 0.5 * (x + 1), 0.5 * w
    i, j = 2, 9
    X = sp.starts[i] + u[:, None] * (sp.ends[i] - sp.starts[i])
    Y = sp.starts[j] + u[:, None] * (sp.ends[j] - sp.starts[j])
    r = np.linalg.norm(X[:, None] - Y[None], axis=2)
    ref = (wu[:, None] * wu[None] * kv(0, s * r)).sum() / (2 * np.pi) * sp.lengths[i] * sp.lengths[j]
    assert V[i, j] == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("s", [1.0, 1 + 2j])
@pytest.mark.parametrize("m", [0, 1, 4])
def test_circle_symbols_second_order(s, m):
    errs = {k: [] for k in "VKW"}
    for n in (32, 64, 128):
        sp = BoundarySpaces.circle(1.0, n)
        vals = circle_rayleigh(sp, CalderonAssembler(sp), s, m)
        for k in "VKW":
            errs[k].append(abs(vals[k] - circle_symbol(k, m, s)))
    for k in "VKW":
        ratio = errs[k][1] / errs[k][2]
        # W at m = 4 is still pre-asymptotic here; its ratio decreases towards 4 from above
        upper = 6.0 if (k == "W" and m == 4) else 5.0
        assert 3.0 < ratio < upper, (k, errs[k])


def test_projector_residual_decreases():
    res = []
    for n in (16, 32, 64):
        sp = BoundarySpaces.circle(1.0, n)
        res.append(projector_residual(sp, CalderonAssembler(sp), 1 + 1j))
    assert res[0] > res[1] > res[2]
    assert res[1] / res[2] > 4


def test_adjoint_is_transpose(circle32):
    sp, asm = circle32
    blk = asm.calderon(2 + 1j)
    np.testing.assert_allclose(blk.Kt, blk.K.T, atol=1e-13)
    assert blk.shape == (sp.M2 + sp.M3,) * 2
    np.testing.assert_allclose(asm(2 + 1j), blk.matrix)


def test_conjugate_symmetry(circle32):
    _, asm = circle32
    s = 0.7 + 3j
    np.testing.assert_allclose(asm(np.conj(s)), np.conj(asm(s)), atol=1e-14)


@settings(max_examples=15, deadline=None)
@given(sr=st.floats(0.05, 20.0), si=st.floats(-30.0, 30.0), seed=st.integers(0, 1000))
def test_calderon_positivity(circle32, sr, si, seed):
    """``Re <x, B(s) x> >= 0`` for ``Re s > 0`` (coercivity of the Calderon block)."""
    _, asm = circle32
    s = complex(sr, si)
    B = asm(s)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(B.shape[0]) + 1j * rng.standard_normal(B.shape[0])
    q = np.vdot(x, B @ x).real
    assert q >= -1e-10 * np.linalg.norm(B) * np.vdot(x, x).real


def test_single_layer_positive_definite(circle32):
    sp, asm = circle32
    V = asm.single_layer(1.0)
    assert np.linalg.eigvalsh(0.5 * (V + V.T)).min() > 0


def test_invalid_frequency(circle32):
    _, asm = circle32
    with pytest.raises(ValueError):
        asm.tensors(-1.0)
    with pytest.raises(ValueError):
        asm.tensors(2j)


def test_escalated_options_agree():
    sp = BoundarySpaces.circle(1.0, 24)
    s = 40 + 60j
    a = assemble_calderon(s, sp).matrix
    b = assemble_calderon(s, sp, QuadratureOptions().escalated()).matrix
    assert np.abs(a - b).max() <= 1e-6 * np.abs(b).max()


def test_decay_cutoff_drops_far_pairs():
    sp = BoundarySpaces.circle(1.0, 24)
    V = assemble_V(500.0, sp)
    assert V[0, 12] == 0.0 and V[0, 0] != 0.0
