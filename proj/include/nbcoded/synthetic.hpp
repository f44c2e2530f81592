#ifndef NBCODED_SYNTHETIC_HPP
#define NBCODED_SYNTHETIC_HPP

#include <cstddef>
#include <cstdint>

#include "nbcoded/data.hpp"

namespace nbcoded::synthetic {

struct FlowGeneratorConfig {
    std::size_t rows = 10000;
    /// Share of attack rows (UNSW-NB15 after filtering is about 0.126).
    double attack_rate = 0.126;
    /// Share of attack rows whose features are drawn from a normal-traffic
    /// profile, and vice versa, producing class overlap.
    double overlap = 0.04;
    /// Share of rows tagged with a service outside the default filter.
    double foreign_service_rate = 0.1;
    std::uint64_t seed = 0;
};

/// Imbalanced two-class flow records resembling UNSW-NB15 rows.
///
/// Each row is drawn from a traffic profile (DNS lookups, FTP sessions,
/// unknown-service TCP for normal traffic; DNS floods, exploit sessions and
/// scans for attacks). Inside a profile, a shared log-normal intensity drives
/// load, packet size and jitter together, so features are strongly dependent
/// given the class. Records carry the nine default features plus `dur`,
/// service tokens and attack families.
data::Dataset generate_flows(const FlowGeneratorConfig &config);

} // namespace nbcoded::synthetic

#endif
