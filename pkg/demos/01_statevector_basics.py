# Statevector basics
#
# A register of n qubits is a vector of 2**n complex amplitudes. Qubit q is
# bit q of the basis index, so |01> (qubit 0 set) lives at index 1.

import numpy as np

from qmalsim.simulator import (
    GateOp,
    apply_crx,
    apply_rot,
    apply_rotation,
    dense_circuit,
    init_state,
    run,
    z_expectation,
)

# Start from |00> and flip qubit 0 with RX(pi). The amplitude picks up a -i phase.

state = init_state(2)
apply_rotation(state, "X", 0, np.pi)
print("RX(pi)|00> =", np.round(state.amplitudes, 6))
print("<Z0> =", z_expectation(state, 0), " <Z1> =", z_expectation(state, 1))

# Rot(phi, theta, omega) is RZ(phi) then RY(theta) then RZ(omega).
# Rot(0, pi, 0) is just RY(pi), so it sends |0> to |1> as well.

single = apply_rot(init_state(1), 0, 0.0, np.pi, 0.0)
print("Rot(0, pi, 0)|0> gives <Z> =", round(z_expectation(single, 0), 12))

# CRX only acts where the control bit is 1. With the control at |0>, nothing happens.

idle = apply_crx(init_state(2), 0, 1, 1.3)
print("CRX with control in |0> leaves the state alone:", np.allclose(idle.amplitudes, [1, 0, 0, 0]))

# Put the control into superposition first and the target becomes entangled with it.

state = init_state(2)
apply_rotation(state, "Y", 0, np.pi / 2)
apply_crx(state, 0, 1, np.pi)
print("after RY(pi/2) on 0 and CRX(pi) 0->1:", np.round(state.amplitudes, 6))
print("<Z1> =", round(z_expectation(state, 1), 12))

# The kernels never build a 2**n x 2**n matrix. For small circuits we can still
# check them against the explicit Kronecker-product operator.

ops = [
    GateOp("RY", 0, (0.4,)),
    GateOp("ROT", 2, (0.1, 0.9, -0.3)),
    GateOp("CRX", 1, (2.2,), control=0),
    GateOp("RZ", 1, (1.1,)),
]
fast = run(init_state(3), ops).amplitudes
slow = dense_circuit(ops, 3) @ init_state(3).amplitudes
print("kernel vs dense, max deviation:", np.max(np.abs(fast - slow)))

# States can be batched: a leading axis of independent registers, which is
# how the training loop evaluates many samples or shifted parameters at once.

batch = init_state(3, batch=4)
apply_rotation(batch, "X", 2, np.linspace(0, np.pi, 4))
print("batched <Z2>:", np.round(z_expectation(batch, 2), 6))
