"""The detector error budget of a purified lattice.

Purification is not error-corrected: every Y measurement along a path can
inject an error, and each measurement involves two photon detectors.  The
closed-form rates below quantify that accumulation and invert it into a
fidelity requirement for the hardware.
"""

from raussim import (
    ADAPTIVE_LOSS_THRESHOLD,
    STATIC_LOSS_THRESHOLD,
    ErrorModelParams,
    node_error_rate,
    path_error_rate,
    required_fidelity,
)

# at box size 20 the mean realized path runs about 29 edges
f, mean_len = 0.9999, 29

p_path = path_error_rate(ErrorModelParams(fidelity=f, mean_length=mean_len))
p_node = node_error_rate(ErrorModelParams(fidelity=f, mean_length=mean_len))
p_node_halved = node_error_rate(ErrorModelParams(fidelity=f, mean_length=mean_len, halving=True))

print(f"detector fidelity {f}, mean path length {mean_len}:")
print(f"  per-bond error            {p_path:.4%}")
print(f"  per-node error (raw)      {p_node:.4%}   (a node owns 2L qubits)")
print(f"  per-node error (halved)   {p_node_halved:.4%}   (random by-product guess)")

print(f"\nloss tolerances of the coarse lattice for context: "
      f"{ADAPTIVE_LOSS_THRESHOLD:.1%} adaptive, {STATIC_LOSS_THRESHOLD:.1%} static")

# invert: what fidelity keeps the halved node error under 0.6%?
target = 0.006
f_req = required_fidelity(target, mean_len)
print(f"\nrequired fidelity for node error <= {target:.1%}: {f_req:.6f}")
check = node_error_rate(ErrorModelParams(fidelity=f_req, mean_length=mean_len, halving=True))
print(f"  round trip: {check:.6%} at that fidelity")

# sensitivity: longer paths demand better detectors
print("\nfidelity needed for 0.6% node error vs mean path length:")
for length in (16, 23.48, 28.42, 33.54, 48):
    print(f"  L = {length:6.2f}  ->  f >= {required_fidelity(target, length):.6f}")
