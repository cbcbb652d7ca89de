import numpy as np

# ordered 2-form basis (dx12, dx13, dx14, dx34, dx42, dx23), zero-based
PAIRS = ((0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2))
PAIR_A = np.array([p[0] for p in PAIRS])
PAIR_B = np.array([p[1] for p in PAIRS])

# wedge pairing on 2-forms: a ^ b = a @ PAIRING @ b  (coefficient of dx1234)
PAIRING = np.zeros((6, 6))
PAIRING[:3, 3:] = np.eye(3)
PAIRING[3:, :3] = np.eye(3)

# seeds for the Gram-Schmidt construction of an oriented frame of Lambda^+.
# The second reversed-orientation seed is negated so that the resulting
# frame satisfies J_i J_j = eps_ijk J_k - delta_ij for that orientation too.
SEEDS = {
    1: np.array([[1, 0, 0, 1, 0, 0],
                 [0, 1, 0, 0, 1, 0],
                 [0, 0, 1, 0, 0, 1]], dtype=float),
    -1: np.array([[1, 0, 0, -1, 0, 0],
                  [0, -1, 0, 0, 1, 0],
                  [0, 0, 1, 0, 0, -1]], dtype=float),
}
