import pytest

from cuspforms.gln import companion_elliptic, default_torus_poly, elliptic_bump
from cuspforms.group import lift_to_group, window_constants
from cuspforms.lattice import fourier_separable, scale_function
from cuspforms.padic import ScaledResidue


def build_chain(p=3, n=2, depth=1, val_lambda=None, pad=0, poly=None):
    """The bump -> transform -> scale -> lift chain, as plain objects."""
    f = poly or default_torus_poly(p, n)
    C, cert = companion_elliptic(f, prec=8)
    bump = elliptic_bump(C, depth, pad=pad)
    phi_hat = fourier_separable(bump.function)
    n0, n1 = window_constants(phi_hat.window)
    v = 2 * n1 + n0 if val_lambda is None else val_lambda
    phi_lam = scale_function(phi_hat, ScaledResidue(p, v, 1, 8))
    return {
        "bump": bump, "phi": bump.function, "phi_hat": phi_hat, "phi_lam": phi_lam,
        "n0": n0, "n1": n1, "val_lambda": v,
        "f_exp": lift_to_group(phi_lam, "exp") if p >= 3 else None,
        "f_id": lift_to_group(phi_lam, "id-plus-x"),
    }


@pytest.fixture(scope="session")
def default_chain():
    return build_chain()


# -- acceptance reporting ----------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title, self.detail = number, title, ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            line = f"PASS criterion {self.number}: {self.title}" + (f" ({self.detail})" if self.detail else "")
        else:
            line = f"FAIL criterion {self.number}: {self.title}: {exc_type.__name__}: {exc}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return False


def criterion(number, title):
    """Context manager recording one PASS/FAIL line for an acceptance criterion."""
    return _Criterion(number, title)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
