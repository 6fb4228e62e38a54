#include "emq/qubit.hpp"

#include <cmath>

namespace emq {

std::string_view gate_name(QubitGate gate)
{
    switch (gate) {
    case QubitGate::I: return "I";
    case QubitGate::X: return "X";
    case QubitGate::Z: return "Z";
    case QubitGate::XZ: return "XZ";
    case QubitGate::H: return "H";
    case QubitGate::XH: return "XH";
    case QubitGate::ZH: return "ZH";
    case QubitGate::XZH: return "XZH";
    }
    return "?";
}

std::optional<QubitGate> gate_from_name(std::string_view name)
{
    for (auto g : kPauliHadamardGates) {
        if (gate_name(g) == name) return g;
    }
    return std::nullopt;
}

Eigen::Matrix2cd gate_matrix(QubitGate gate)
{
    Eigen::Matrix2cd x, z, h;
    x << 0, 1, 1, 0;
    z << 1, 0, 0, -1;
    const double r = 1.0 / std::sqrt(2.0);
    h << r, r, r, -r;
    switch (gate) {
    case QubitGate::I: return Eigen::Matrix2cd::Identity();
    case QubitGate::X: return x;
    case QubitGate::Z: return z;
    case QubitGate::XZ: return x * z;
    case QubitGate::H: return h;
    case QubitGate::XH: return x * h;
    case QubitGate::ZH: return z * h;
    case QubitGate::XZH: return x * z * h;
    }
    return Eigen::Matrix2cd::Identity();
}

}  // namespace emq
