// verify.hpp - oracle-versus-engine agreement suite behind `verify-all`

#pragma once

#include "emq/oracle.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace emq {

struct VerifyOptions {
    int instances = 20;
    std::uint64_t seed = 1;
};

struct VerifySummary {
    std::vector<oracle::OracleReport> reports;

    bool pass() const;
    int failures() const;
};

/// Randomized engine/oracle comparisons (Liouvillian, both evolution routes,
/// steady state, RHS kernels), oracle self-consistency, closed forms and the
/// teleportation correction table.
VerifySummary verify_all(const VerifyOptions& options = {});

nlohmann::json to_json(const VerifySummary& summary);

}  // namespace emq
