"""Walk through the two-tap orthogonal cascade on tiny inputs.

Run: python3 demos/01_cascade_walkthrough.py
"""

import numpy as np

from merawave import HAAR, analysis_matrix, analyze, filters_from_matrix, frequency_response, haar_stack, synthesize
from merawave.filterbank import dc_gain_over_qmf_family, polyphase_analyze_oracle, qmf_member
from merawave.training import polar_project

np.set_printoptions(precision=4, suppress=True)

# One Haar layer on four samples: pair-wise rotation/reflection of (x[2k], x[2k+1]).
x = np.array([1.0, 2.0, 3.0, 4.0])
p = analyze(x, HAAR[None])
print("one layer     a =", p.approx, " d =", p.details[0])
print("energy        ", x @ x, "=", p.energy())

# Two layers: the approximation is split again.
p2 = analyze(x, haar_stack(2))
print("two layers    flattened [a2, d2, d1] =", p2.flatten())
print("reconstructed ", synthesize(p2, haar_stack(2)))

# The same layer seen as a filter bank: convolve with reversed taps, keep even outputs.
a, d = polyphase_analyze_oracle(x, HAAR)
print("filter view   a =", a, " d =", d)

# Any 2x2 orthogonal matrix gives an orthogonal operator on the whole window.
rng = np.random.default_rng(0)
stack = np.stack([polar_project(rng.normal(size=(2, 2))) for _ in range(3)])
A = analysis_matrix(16, stack)
print("||A^T A - I|| for a random 3-level stack on 16 samples:", np.linalg.norm(A.T @ A - np.eye(16)))

# Power complementarity of the derived two-tap filters.
g, h = frequency_response(filters_from_matrix(stack[0]), 9)
print("|G|^2 + |H|^2 on a 9-point grid:", g.magnitude**2 + h.magnitude**2)

# Among mirror-form reflections, the DC gain |g0 + g1| peaks at Haar.
theta, gain = dc_gain_over_qmf_family(4096)
print(f"DC-gain maximizer theta = {theta:.5f} (pi/4 = {np.pi / 4:.5f}), gain = {gain:.6f}")
print("member at the peak:\n", qmf_member(theta))
