"""Right-corner scattering toolkit.

Two halves:

* exact side — arbitrary-precision rational linear algebra
  (:mod:`cornerscat.exact_linalg`) powering a mechanical certifier of
  Taylor-coefficient rigidity at right-angle corners
  (:mod:`cornerscat.corner_certifier`);

* numerical side — a Nystrom boundary-integral forward solver for the
  2D Helmholtz transmission problem on rectangles and disks
  (:mod:`cornerscat.scatter_forward`) and single-incoming-wave
  rectangle recovery from far-field data
  (:mod:`cornerscat.inverse_recovery`).

Command-line entry points live in :mod:`cornerscat.cli`.
"""

__version__ = "0.1.0"
