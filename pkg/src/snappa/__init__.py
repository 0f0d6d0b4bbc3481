"""Simulator and calibration pipeline for selective, number-dependent photon
addition on a cavity mode assisted by a dispersively coupled qubit.

Subpackage layout:

- :mod:`snappa.hilbert` -- finite Fock-space / composite operator algebra
- :mod:`snappa.hamiltonian` -- dispersive Hamiltonian, drive tones, Stark shifts
- :mod:`snappa.dynamics` -- unitary and Lindblad time evolution
- :mod:`snappa.gates` -- ideal gate operators and state preparation
- :mod:`snappa.tomography` -- Wigner sampling, parity readout, reconstruction
- :mod:`snappa.calibration` -- drive amplitude / frequency / phase calibration
- :mod:`snappa.experiments` -- experiment catalog and runners
- :mod:`snappa.cli` -- command line front end

Conventions used throughout: the composite Hilbert space is ordered
qubit (x) cavity with basis index ``s * cavity_levels + n`` for qubit level
``s`` in {0 = g, 1 = e} and Fock index ``n``; all frequencies are angular
(rad/s); all times are seconds.
"""

__version__ = "0.1.0"
