"""pqc2: post-quantum-ready secure publish/subscribe command and control.

Layers, bottom up:

  kernels  - SHA-256 hot loops (compiled core + pure fallback)
  crypto   - scheme registry: signatures, KEMs, AEAD, KDF, Merkle trees
  pki      - self-signed CA, certificate issuance and verification
  envelope - signed application-layer messages with anti-replay
  channel  - mutually-authenticated encrypted point-to-point channel
  authz    - per-topic publish/subscribe allowlists, default deny
  bus      - broker-mediated pub/sub transport with capture tap
  agents   - ground station, mobile agent, monitor, relay, attacker
  bench    - timing and throughput measurement harness
  cli      - the ``pqc2`` entry point
"""

__version__ = "0.1.0"
