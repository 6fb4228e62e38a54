// params_io.hpp - flat key=value parameter files
//
// Grammar (one entry per line):
//   key = value          # trailing comments allowed
// Values are real numbers or products of numbers and `pi`, e.g.
// `omega_m = 2*pi*10e6`. Keys are the SystemParams / SpinParams field
// names; complex alpha is given as alpha_re / alpha_im and spin positions
// as `spin_positions = x,y,z; x,y,z`. Unknown keys are rejected.

#pragma once

#include "emq/model.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace emq {

struct KeyValue {
    std::string key;
    std::string value;
    int line = 0;
};

/// Splits text into entries; throws ConfigError on malformed lines or repeated keys.
std::vector<KeyValue> parse_key_values(std::string_view text);

/// Parses a number or `*`-product of numbers and `pi`.
double parse_real(std::string_view text, const KeyValue& where);

struct PhysicalParams {
    SystemParams system;
    SpinParams spin;
};

/// Applies one entry. Returns false when the key is not a parameter name.
bool apply_parameter(PhysicalParams& params, const KeyValue& entry);

/// Loads a parameter file; every key must be a parameter name.
PhysicalParams load_parameters(std::string_view text);
PhysicalParams load_parameter_file(const std::string& path);

/// Names accepted by apply_parameter, in documentation order.
const std::vector<std::string>& parameter_keys();

}  // namespace emq
