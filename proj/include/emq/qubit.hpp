// qubit.hpp - single-qubit gates and the teleportation correction table
//
// Gate names read like operator products: "ZH" is Z * H, so H acts first.

#pragma once

#include "emq/fockspace.hpp"

#include <array>
#include <optional>
#include <string_view>

namespace emq {

enum class QubitGate { I, X, Z, XZ, H, XH, ZH, XZH };

inline constexpr std::array<QubitGate, 4> kPauliGates{QubitGate::I, QubitGate::X, QubitGate::Z, QubitGate::XZ};
inline constexpr std::array<QubitGate, 8> kPauliHadamardGates{QubitGate::I,  QubitGate::X,  QubitGate::Z,
                                                              QubitGate::XZ, QubitGate::H,  QubitGate::XH,
                                                              QubitGate::ZH, QubitGate::XZH};

std::string_view gate_name(QubitGate gate);
std::optional<QubitGate> gate_from_name(std::string_view name);
Eigen::Matrix2cd gate_matrix(QubitGate gate);

/// Correction applied to the receiving qubit for each 2-bit Bell outcome.
/// Outcomes are indexed 2*b0 + b1, where b0 is read on the input mode and b1
/// on the local half of the resource.
struct CorrectionTable {
    std::array<QubitGate, 4> gates{};

    QubitGate at(int b0, int b1) const { return gates.at(static_cast<std::size_t>(2 * b0 + b1)); }
    bool operator==(const CorrectionTable&) const = default;
};

}  // namespace emq
