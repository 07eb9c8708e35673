// Hardware-efficient real-amplitude ansatz: full RY rotation layers
// alternating with linear-chain CNOT entangling layers (control i, target
// i+1). `rotation_layers` RY layers enclose `rotation_layers - 1` CNOT
// layers, one angle per RY.

#pragma once

#include "qdes/circuit.hpp"

namespace qdes {

struct Ansatz {
    int num_qubits = 1;
    int rotation_layers = 1;

    int parameter_count() const { return num_qubits * rotation_layers; }

    Circuit circuit(std::span<const double> theta) const {
        if (static_cast<int>(theta.size()) != parameter_count())
            throw usage_error("Ansatz: parameter count mismatch");
        Circuit c(num_qubits);
        int p = 0;
        for (int layer = 0; layer < rotation_layers; ++layer) {
            for (int q = 0; q < num_qubits; ++q) c.add(Gate::ry(q, theta[p++]));
            if (layer + 1 < rotation_layers)
                for (int q = 0; q + 1 < num_qubits; ++q) c.add(Gate::cnot(q, q + 1));
        }
        return c;
    }

    Statevector prepare(std::span<const double> theta) const {
        for (double t : theta)
            if (!std::isfinite(t)) throw usage_error("Ansatz: non-finite parameter");
        return replay(circuit(theta), zero_state(num_qubits)).state;
    }
};

}  // namespace qdes
