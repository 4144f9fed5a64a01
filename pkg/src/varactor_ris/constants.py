"""Physical constants and reference values shared across modules."""

import math

SPEED_OF_LIGHT = 299_792_458.0  # m/s
MU0 = 4e-7 * math.pi  # H/m
EPS0 = 1.0 / (MU0 * SPEED_OF_LIGHT**2)  # F/m
ETA0 = math.sqrt(MU0 / EPS0)  # free-space wave impedance, ohms

# Design centre frequency. The cell geometry is also quoted at 6.0 GHz in
# some sources; 6.1 GHz is used for the wavelength and all band checks.
CENTER_FREQUENCY = 6.1e9
BAND = (5.8e9, 6.4e9)

BIAS_MIN = 0.0
BIAS_MAX = 14.0
VOLTAGE_RESOLUTION = 0.01
DAC_FULL_SCALE_CODE = 65535


def wavelength(frequency: float) -> float:
    return SPEED_OF_LIGHT / frequency


def wavenumber(frequency: float) -> float:
    return 2.0 * math.pi * frequency / SPEED_OF_LIGHT
