import pytest

from ppres import circuit, fields

# Frozen reference values, computed once with mpmath at 30 digits from the
# closed-form relations and exact SI constants (h = 6.62607015e-34 J s).
DELTA_I_REF = 3.94944218509985631e-07      # A, L = 15.93 pH at 7.5 GHz
Z_REF = 0.750683564575281094               # Ohm
B_FIDUCIAL = 5.13215365e-07                  # T at (0, -50 nm), quad-integrated Biot-Savart
T1_PURCELL = 3.31572798108115283e-05         # s, g0 = 30 kHz, kappa = 2pi 750 kHz
TAU_REF = 0.0131555555555555556              # s, T1 = 0.8 ms
TAU_NEW = 3.19240435607151595e-04            # s, T1 = T1_PURCELL


@pytest.fixture(scope="session")
def design():
    return circuit.DeviceDesign(825e-6, 10e-6, 300e-9, 50e-9, 500e-9, 11.9, 0.2e-12)


@pytest.fixture(scope="session")
def params(design):
    return circuit.CircuitParams.from_pair(L_k=circuit.kinetic_inductance(design),
                                           f_r=7.5e9, L=15.93e-12)


@pytest.fixture(scope="session")
def section(params):
    return fields.CrossSection(300e-9, 50e-9, 500e-9, params.delta_I)


@pytest.fixture(scope="session")
def fmap(section):
    return fields.field_map(section)


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
