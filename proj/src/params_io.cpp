#include "emq/params_io.hpp"

#include "emq/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace emq {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

using SystemField = std::optional<double> SystemParams::*;
using SpinField = std::optional<double> SpinParams::*;

const std::map<std::string, SystemField, std::less<>>& system_fields()
{
    static const std::map<std::string, SystemField, std::less<>> fields{
        {"omega_m", &SystemParams::omega_m},
        {"Omega_m_intrinsic", &SystemParams::Omega_m_intrinsic},
        {"Gamma_m_intrinsic", &SystemParams::Gamma_m_intrinsic},
        {"gamma_m", &SystemParams::gamma_m},
        {"kappa", &SystemParams::kappa},
        {"omega_0", &SystemParams::omega_0},
        {"G_pull", &SystemParams::G_pull},
        {"g0", &SystemParams::g0},
        {"x0", &SystemParams::x0},
        {"Omega_d", &SystemParams::Omega_d},
        {"omega_d", &SystemParams::omega_d},
        {"Delta", &SystemParams::Delta},
        {"g", &SystemParams::g},
        {"m_bio", &SystemParams::m_bio},
        {"M_mem", &SystemParams::M_mem},
        {"T", &SystemParams::T},
        {"n_bar", &SystemParams::n_bar},
        {"kappa_prime", &SystemParams::kappa_prime},
        {"gamma_prime", &SystemParams::gamma_prime},
        {"n_bar_prime", &SystemParams::n_bar_prime},
        {"delta_disp", &SystemParams::delta_disp},
    };
    return fields;
}

const std::map<std::string, SpinField, std::less<>>& spin_fields()
{
    static const std::map<std::string, SpinField, std::less<>> fields{
        {"g_s", &SpinParams::g_s},
        {"mu_B", &SpinParams::mu_B},
        {"B_at_spin", &SpinParams::B_at_spin},
        {"G_m", &SpinParams::G_m},
        {"x0_prime", &SpinParams::x0_prime},
        {"lambda", &SpinParams::lambda},
        {"omega_1", &SpinParams::omega_1},
        {"omega_2", &SpinParams::omega_2},
        {"Delta_e", &SpinParams::Delta_e},
        {"Omega_d_prime", &SpinParams::Omega_d_prime},
        {"omega_eff", &SpinParams::omega_eff},
    };
    return fields;
}

// Rates and masses that must be nonnegative; Delta, delta_disp, Delta_e,
// Omega_d_prime and alpha are signed.
const std::set<std::string, std::less<>>& signed_keys()
{
    static const std::set<std::string, std::less<>> keys{"Delta", "delta_disp", "Delta_e", "Omega_d_prime",
                                                         "alpha_re", "alpha_im"};
    return keys;
}

}  // namespace

std::vector<KeyValue> parse_key_values(std::string_view text)
{
    std::vector<KeyValue> out;
    std::set<std::string> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'", line_no);
        }
        const auto key = std::string(trim(line.substr(0, eq)));
        const auto value = std::string(trim(line.substr(eq + 1)));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key", line_no);
        if (value.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": empty value for '" + key + "'", line_no, key);
        }
        if (!seen.insert(key).second) {
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'", line_no, key);
        }
        out.push_back({key, value, line_no});
    }
    return out;
}

double parse_real(std::string_view text, const KeyValue& where)
{
    double product = 1.0;
    std::size_t pos = 0;
    bool any = false;
    while (pos <= text.size()) {
        const auto star = text.find('*', pos);
        const auto token = trim(text.substr(pos, star == std::string_view::npos ? std::string_view::npos : star - pos));
        pos = star == std::string_view::npos ? text.size() + 1 : star + 1;
        if (token == "pi") {
            product *= constants::pi;
        } else {
            double v = 0.0;
            const auto* first = token.data();
            const auto* last = token.data() + token.size();
            const auto res = std::from_chars(first, last, v);
            if (token.empty() || res.ec != std::errc{} || res.ptr != last) {
                throw ConfigError("line " + std::to_string(where.line) + ": cannot parse '" + std::string(text) +
                                      "' as a number for '" + where.key + "'",
                                  where.line, where.key);
            }
            product *= v;
        }
        any = true;
    }
    if (!any || !std::isfinite(product)) {
        throw ConfigError("line " + std::to_string(where.line) + ": non-finite value for '" + where.key + "'",
                          where.line, where.key);
    }
    return product;
}

bool apply_parameter(PhysicalParams& params, const KeyValue& entry)
{
    const auto check_sign = [&](double v) {
        if (v < 0.0 && !signed_keys().contains(entry.key)) {
            throw ConfigError("line " + std::to_string(entry.line) + ": '" + entry.key + "' must be nonnegative",
                              entry.line, entry.key);
        }
        return v;
    };
    if (const auto it = system_fields().find(entry.key); it != system_fields().end()) {
        params.system.*(it->second) = check_sign(parse_real(entry.value, entry));
        return true;
    }
    if (const auto it = spin_fields().find(entry.key); it != spin_fields().end()) {
        params.spin.*(it->second) = check_sign(parse_real(entry.value, entry));
        return true;
    }
    if (entry.key == "alpha_re" || entry.key == "alpha_im") {
        Complex a = params.system.alpha.value_or(Complex{});
        const double v = parse_real(entry.value, entry);
        a = entry.key == "alpha_re" ? Complex(v, a.imag()) : Complex(a.real(), v);
        params.system.alpha = a;
        return true;
    }
    if (entry.key == "spin_positions") {
        params.spin.spin_positions.clear();
        std::stringstream groups(entry.value);
        std::string group;
        while (std::getline(groups, group, ';')) {
            if (trim(group).empty()) continue;
            std::stringstream comps(group);
            std::string c;
            std::vector<double> xyz;
            while (std::getline(comps, c, ',')) xyz.push_back(parse_real(trim(c), entry));
            if (xyz.size() != 3) {
                throw ConfigError("line " + std::to_string(entry.line) + ": spin position needs 3 components",
                                  entry.line, entry.key);
            }
            params.spin.spin_positions.emplace_back(xyz[0], xyz[1], xyz[2]);
        }
        return true;
    }
    return false;
}

PhysicalParams load_parameters(std::string_view text)
{
    PhysicalParams params;
    for (const auto& kv : parse_key_values(text)) {
        if (!apply_parameter(params, kv)) {
            throw ConfigError("line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'", kv.line, kv.key);
        }
    }
    return params;
}

PhysicalParams load_parameter_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open parameter file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_parameters(ss.str());
}

const std::vector<std::string>& parameter_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : system_fields()) k.push_back(name);
        for (const auto& [name, _] : spin_fields()) k.push_back(name);
        k.push_back("alpha_re");
        k.push_back("alpha_im");
        k.push_back("spin_positions");
        return k;
    }();
    return keys;
}

}  // namespace emq
