import itertools

import numpy as np
import pytest

from cuspforms.cyclotomic import Cyclotomic
from cuspforms.errors import CuspViolation, DomainViolation, InsufficientPrecision, ReductionMismatch
from cuspforms.gln import ParabolicData, standard_parabolics
from cuspforms.group import (
    GroupFunction,
    bch_defect_check,
    chart,
    chart_change,
    chart_inverse,
    charts_agree,
    group_cusp_verify,
    jacquet_vanishing_check,
    lambda_threshold,
    lift_to_group,
    required_precision,
    support_level,
)
from cuspforms.lattice import LatticeWindow, SchwartzFunction, random_schwartz, scale_function
from cuspforms.padic import AtLeast, ScaledMatrix, ScaledResidue, exp_int, lattice_valuation, log_int, mat_mul

from conftest import build_chain


def test_threshold_examples():
    assert lambda_threshold(1, 1) == 3
    assert lambda_threshold(0, 0) == 0
    assert lambda_threshold(2, 1) == 4
    assert support_level(7, 1) == 6
    with pytest.raises(ValueError):
        lambda_threshold(-1, 0)


# -- BCH --------------------------------------------------------------------


def test_bch_commuting_diagonal_has_zero_defect():
    X = ScaledMatrix.from_integers(5, [[5, 0], [0, 10]], prec=6)
    Y = ScaledMatrix.from_integers(5, [[25, 0], [0, 5]], prec=6)
    w = bch_defect_check(X, Y)
    assert w.holds and isinstance(w.defect_valuation, AtLeast) and w.defect.is_zero()


def test_bch_tightness_witness():
    p = 5
    X = ScaledMatrix.elementary(p, 2, 0, 1, prec=6).times_scalar(p)
    Y = ScaledMatrix.elementary(p, 2, 1, 0, prec=6).times_scalar(p)
    w = bch_defect_check(X, Y)
    assert w.required_valuation == 2 and w.defect_valuation == 2 and w.holds
    # the defect is (1/2)[X, Y] = (25/2)(E11 - E22) modulo p^3
    half = pow(2, -1, p**3)
    want = ScaledMatrix.from_integers(p, [[25 * half, 0], [0, -25 * half]], prec=3)
    assert w.defect.with_abs_prec(3) == want


def test_bch_random_pairs():
    rng = np.random.default_rng(6)
    for p in (3, 5):
        for _ in range(100):
            rows_x = (rng.integers(0, p**4, size=(2, 2)) * p).tolist()
            rows_y = (rng.integers(0, p**4, size=(2, 2)) * p).tolist()
            X = ScaledMatrix.from_integers(p, rows_x, prec=5)
            Y = ScaledMatrix.from_integers(p, rows_y, prec=5)
            vx, vy = lattice_valuation(X), lattice_valuation(Y)
            if isinstance(vx, AtLeast) or isinstance(vy, AtLeast) or vx + vy >= 5:
                continue
            assert bch_defect_check(X, Y).holds


def test_bch_refuses_to_guess():
    X = ScaledMatrix.from_integers(3, [[0, 9], [0, 0]], prec=4)
    Y = ScaledMatrix.from_integers(3, [[0, 0], [9, 0]], prec=4)
    with pytest.raises(InsufficientPrecision):
        bch_defect_check(X, Y)
    with pytest.raises(InsufficientPrecision):
        bch_defect_check(ScaledMatrix.zero(3, 2, 0, 4), Y)


@pytest.mark.parametrize("n_level", [1, 2])
def test_bch_along_unipotent_directions(n_level):
    """val(log(e^X e^N) - X - N) >= 2n for X in p^n L, N in p^n L_N."""
    rng = np.random.default_rng(n_level)
    p, W = 3, 3 * n_level + 3
    m = p**W
    for P in standard_parabolics(3):
        for _ in range(40):
            X = (rng.integers(0, m, size=(3, 3)) * p**n_level % m).tolist()
            N = [[0] * 3 for _ in range(3)]
            for i, j in P.nilradical_coords:
                N[i][j] = int(rng.integers(0, m)) * p**n_level % m
            Z = log_int(mat_mul(chart(X, "exp", p, W), chart(N, "exp", p, W), m), p, W)
            D = [[(Z[i][j] - X[i][j] - N[i][j]) % m for j in range(3)] for i in range(3)]
            assert all(x % p ** (2 * n_level) == 0 for r in D for x in r)


# -- charts -----------------------------------------------------------------


def test_charts_invert_each_other():
    rng = np.random.default_rng(1)
    p, W = 3, 7
    for model in ("exp", "id-plus-x"):
        for _ in range(30):
            X = (rng.integers(0, p**W, size=(3, 3)) * p % p**W).tolist()
            assert chart_inverse(chart(X, model, p, W), model, p, W) == X
    g = chart([[3, 6], [0, 9]], "exp", 3, 6)
    h = chart_change(g, "exp", "id-plus-x", 3, 6)
    assert chart_change(h, "id-plus-x", "exp", 3, 6) == g


# -- lifting ----------------------------------------------------------------


def test_lift_of_delta_is_indicator_of_K_m():
    p = 3
    w = LatticeWindow.full(p, 2, 1, 2)
    f = lift_to_group(SchwartzFunction.delta(w), "exp")
    one = Cyclotomic.integer(p, 1)
    for key in w.points():
        assert f(f.element(key)) == (one if not any(key) else Cyclotomic.zero(p))
    rng = np.random.default_rng(2)
    m = p**f.precision
    for _ in range(30):
        Z = (rng.integers(0, m, size=(2, 2)) * p**2 % m).tolist()
        assert f(exp_int([[x // 9 for x in r] for r in Z], 2, p, f.precision)) == one
    assert f(mat_mul([[1, 3], [0, 1]], [[1, 0], [0, 1]])) .is_zero()


def test_lift_preserves_support_size(default_chain):
    for f in (default_chain["f_exp"], default_chain["f_id"]):
        assert len(f.values) == len(default_chain["phi_lam"].values)


def test_lift_domain_and_precision_errors():
    w0 = LatticeWindow.full(3, 2, 0, 1)
    with pytest.raises(DomainViolation):
        lift_to_group(SchwartzFunction.delta(w0))
    w = LatticeWindow.full(3, 2, 1, 2)
    with pytest.raises(InsufficientPrecision):
        lift_to_group(SchwartzFunction.delta(w), precision=required_precision(1, 2) - 1)
    with pytest.raises(DomainViolation):
        lift_to_group(SchwartzFunction.delta(LatticeWindow.full(2, 2, 1, 2)), "exp")
    assert lift_to_group(SchwartzFunction.delta(LatticeWindow.full(2, 2, 1, 2)), "id-plus-x").p == 2


def test_group_function_json_round_trip(default_chain):
    f = default_chain["f_exp"]
    g = GroupFunction.from_json(f.to_json())
    assert g.to_json() == f.to_json()
    assert set(f.to_json()) >= {"model", "p", "n", "n_level", "m_level", "provenance", "entries"}


# -- invariance and the threshold -------------------------------------------


def _translation_invariant(phi: SchwartzFunction, level: int) -> bool:
    """phi(X + T) = phi(X) for every X and every T in p^level L (level >= a)."""
    w = phi.window
    fine = phi.extend(w.a, max(w.b, level))
    fw = fine.window
    coeffs, _, _ = fine.dense()
    low = fw.p ** (level - fw.a)  # residues mod p^(level - a) are what T cannot move
    high = fw.q // low
    A = coeffs.reshape((high, low) * fw.dim + (coeffs.shape[-1],))
    # value must not depend on any "high" digit
    base = A[(slice(0, 1), slice(None)) * fw.dim]
    return bool(np.all(A == base))


def test_invariance_transfer_and_threshold():
    for depth, pad in [(1, 0), (1, 1)]:
        ch = build_chain(depth=depth, pad=pad)
        n0, n1, v = ch["n0"], ch["n1"], ch["val_lambda"]
        n = support_level(v, n1)
        phi_lam = ch["phi_lam"]
        assert phi_lam.window.a == n and phi_lam.window.b == n + n1 + n0
        assert _translation_invariant(ch["phi_hat"], n0)
        assert _translation_invariant(phi_lam, n + n1 + n0)
        assert v >= 2 * n1 + n0 and n >= n1 + n0
        assert _translation_invariant(phi_lam, 2 * n)
        if pad == 0:
            # unpadded, the window is tight: invariance starts exactly at the bound
            assert not _translation_invariant(phi_lam, n + n1 + n0 - 1)
        else:
            # padding widens the window, not the function; it is invariant one level earlier
            assert _translation_invariant(phi_lam, n + n1 + n0 - 1)


def test_key_pointwise_identity(default_chain):
    """phi_lam(log(e^X e^N)) = phi_lam(X + N) on all reps, n = 2, p = 3."""
    phi_lam = default_chain["phi_lam"]
    f = default_chain["f_exp"]
    w = phi_lam.window
    p, W = w.p, f.precision
    m = p**W
    for P in standard_parabolics(2):
        Ns = list(itertools.product(range(w.q), repeat=len(P.nilradical_coords)))
        for key in w.points():
            X = [[key[i * 2 + j] * p**w.a for j in range(2)] for i in range(2)]
            for digits in Ns:
                N = [[0, 0], [0, 0]]
                for (i, j), r in zip(P.nilradical_coords, digits):
                    N[i][j] = r * p**w.a
                Z = log_int(mat_mul(chart(X, "exp", p, W), chart(N, "exp", p, W), m), p, W)
                zkey = tuple((Z[i][j] // p**w.a) % w.q for i in range(2) for j in range(2))
                xkey = tuple((X[i][j] + N[i][j]) // p**w.a % w.q for i in range(2) for j in range(2))
                assert phi_lam.at_key(zkey) == phi_lam.at_key(xkey)


# -- group cusp verification ------------------------------------------------


@pytest.mark.parametrize("model", ["exp", "id-plus-x"])
def test_default_lift_is_cuspidal(default_chain, model):
    f = default_chain["f_exp" if model == "exp" else "f_id"]
    rep = group_cusp_verify(f, standard_parabolics(2), default_chain["phi_lam"], outside_samples=20)
    assert rep.passed and rep.reduction_checks == 81
    assert rep.per_parabolic[0]["zeros"] == 81


def test_model_cross_check(default_chain):
    assert charts_agree(default_chain["f_exp"], default_chain["f_id"]) == 2 * 81


def test_non_cusp_lift_is_caught():
    ind = SchwartzFunction.indicator(LatticeWindow.full(3, 2, 0, 1))
    f = lift_to_group(scale_function(ind, ScaledResidue(3, 1, 1, 4)), "exp")
    with pytest.raises(CuspViolation) as exc:
        group_cusp_verify(f, standard_parabolics(2))
    assert exc.value.witness["parabolic"] == "1-1"


def test_reduction_mismatch_is_reported(default_chain):
    f = default_chain["f_exp"]
    rng = np.random.default_rng(0)
    wrong = random_schwartz(f.window, rng, density=0.5)
    with pytest.raises(ReductionMismatch) as exc:
        group_cusp_verify(f, standard_parabolics(2), wrong)
    assert "lie_value" in exc.value.witness


def test_lift_above_threshold_n3_id_model():
    ch = build_chain(p=3, n=3)
    rep = group_cusp_verify(ch["f_id"], standard_parabolics(3), ch["phi_lam"], outside_samples=3)
    assert rep.passed and len(rep.per_parabolic) == 3


# -- Jacquet vanishing ------------------------------------------------------


def test_jacquet_default_k(default_chain):
    res = jacquet_vanishing_check(default_chain["f_exp"], ParabolicData((1, 1)))
    assert res.passed and res.k == 1 and res.subgroup_level == 1


def test_jacquet_zero_function():
    f = lift_to_group(SchwartzFunction(LatticeWindow.full(3, 2, 1, 2)), "exp")
    res = jacquet_vanishing_check(f, ParabolicData((1, 1)))
    assert res.passed and res.k == 0


def test_jacquet_rejects_indicator_of_K_m():
    # Supp(f) = K_m gives k = 0, and the integral over N(F)_0 inside K_m is vol * f(x) != 0
    f = lift_to_group(SchwartzFunction.delta(LatticeWindow.full(3, 2, 1, 2)), "exp")
    with pytest.raises(CuspViolation) as exc:
        jacquet_vanishing_check(f, ParabolicData((1, 1)))
    assert exc.value.witness["k"] == 0
