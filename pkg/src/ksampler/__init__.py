"""Scan-adaptive k-space undersampling toolkit.

Learns per-scan Cartesian undersampling masks for multi-coil MRI on
synthetic phantom data: exchange-search reference masks are generated
offline, a small CNN learns to predict them from low-frequency k-space,
and images are reconstructed with an encoder-decoder network or an
unrolled solver with conjugate-gradient data consistency.
"""

__version__ = "0.1.0"
