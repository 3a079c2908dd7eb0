import numpy as np
import pytest

from radialqha import ModelParams, build_plancherel_rule


@pytest.fixture(scope="session")
def disc():
    return ModelParams(n=1, nu=2.5)


@pytest.fixture(scope="session")
def ball2():
    return ModelParams(n=2, nu=3.5)


@pytest.fixture(scope="session", params=[(1, 2.5), (1, 3.5), (2, 2.5), (2, 3.5)], ids=lambda p: f"n{p[0]}-nu{p[1]}")
def model(request):
    n, nu = request.param
    return ModelParams(n=n, nu=nu)


@pytest.fixture(scope="session")
def disc_rule(disc):
    return build_plancherel_rule(disc)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance criteria report one line each at the end of the run
ACCEPTANCE = {}


class Criterion:
    def __init__(self, number, title):
        self.number, self.title = number, title
        self.parts = []

    def check(self, name, residual, tol, relation="<="):
        ok = residual <= tol if relation == "<=" else residual >= tol
        self.parts.append((name, float(residual), tol, relation, bool(ok)))
        return ok

    @property
    def passed(self):
        return bool(self.parts) and all(p[-1] for p in self.parts)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        bad = [p for p in self.parts if not p[-1]]
        name, res, tol, rel, _ = bad[0] if bad else max(self.parts, key=lambda p: p[1] / p[2] if p[3] == "<=" else 0)
        return f"{status} criterion {self.number:>2}: {self.title} [{name}: {res:.2e} {rel} {tol:g}]"

    def finish(self):
        ACCEPTANCE[self.number] = self
        print(self.line())
        failed = [p for p in self.parts if not p[-1]]
        assert not failed, "; ".join(f"{n}: {r:.3e} vs {t:g}" for n, r, t, _, _ in failed)


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k].line())
