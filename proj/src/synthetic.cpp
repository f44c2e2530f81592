#include "nbcoded/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>

#include "nbcoded/errors.hpp"
#include "nbcoded/random.hpp"

namespace nbcoded::synthetic {

namespace {

const std::vector<std::string> kFeatureNames = {"dur",     "sttl",    "sload", "dload",
                                                "smeansz", "dmeansz", "stcpb", "dtcpb",
                                                "djit",    "trans_depth"};

const std::array<const char *, 4> kForeignServices = {"http", "smtp", "ssh", "pop3"};

constexpr double kMaxSeq = 4294967295.0;

struct Flow {
    double dur = 0.0;
    double sttl = 0.0;
    double spkts = 1.0;
    double dpkts = 0.0;
    double smeansz = 0.0;
    double dmeansz = 0.0;
    double stcpb = 0.0;
    double dtcpb = 0.0;
    double djit = 0.0;
    double trans_depth = 0.0;
    std::string service;
    const char *family = nullptr;
};

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double pick(Rng &rng, std::initializer_list<std::pair<double, double>> weighted) {
    double u = rng.uniform();
    for (const auto &[value, weight] : weighted) {
        if (u < weight) {
            return value;
        }
        u -= weight;
    }
    return std::data(weighted)[weighted.size() - 1].first;
}

void tcp_sequence(Rng &rng, Flow &f) {
    f.stcpb = std::floor(rng.uniform(1.0, kMaxSeq));
    f.dtcpb = std::floor(rng.uniform(1.0, kMaxSeq));
}

// Normal traffic profiles. `u` is the shared per-flow intensity.
Flow normal_flow(Rng &rng) {
    Flow f;
    const double u = rng.normal();
    const double profile = rng.uniform();
    if (profile < 0.5) {
        // DNS lookup: one small query, one answer.
        f.service = "dns";
        f.sttl = pick(rng, {{31, 0.97}, {62, 0.03}});
        f.dur = std::exp(-7.0 + 0.8 * u + 0.2 * rng.normal());
        f.spkts = 1 + (rng.uniform() < 0.1);
        f.dpkts = 1 + (rng.uniform() < 0.1);
        f.smeansz = std::round(std::max(28.0, 62.0 + 8.0 * u + 3.0 * rng.normal()));
        f.dmeansz = std::round(std::max(40.0, 120.0 + 35.0 * u + 10.0 * rng.normal()));
    } else if (profile < 0.75) {
        // FTP / unknown-service TCP session.
        f.service = rng.uniform() < 0.5 ? "ftp" : "-";
        f.sttl = 31;
        tcp_sequence(rng, f);
        f.dur = std::exp(0.5 + 1.2 * u + 0.3 * rng.normal());
        f.spkts = std::round(std::exp(2.0 + 0.8 * u + 0.2 * rng.normal())) + 2;
        f.dpkts = std::round(f.spkts * (0.8 + 0.6 * rng.uniform()));
        f.smeansz = std::round(50.0 + 400.0 * logistic(u + 0.5 * rng.normal()));
        f.dmeansz = std::round(60.0 + 1000.0 * logistic(0.8 * u + 0.5 * rng.normal()));
        f.djit = std::exp(3.0 + u + 0.5 * rng.normal());
        f.trans_depth = rng.uniform() < 0.1 ? 1 : 0;
    } else {
        // Unknown-service datagrams (NTP, streaming, ...).
        f.service = "-";
        f.sttl = pick(rng, {{31, 0.98}, {254, 0.02}});
        f.dur = std::exp(-1.0 + 1.5 * u + 0.3 * rng.normal());
        f.spkts = std::round(std::exp(1.0 + 0.7 * u)) + 1;
        f.dpkts = std::round(f.spkts * rng.uniform());
        f.smeansz = std::round(std::max(28.0, 150.0 + 120.0 * u + 30.0 * rng.normal()));
        f.dmeansz = f.dpkts > 0 ? std::round(std::max(28.0, 200.0 + 150.0 * u)) : 0.0;
        f.djit = f.dpkts > 1 ? std::exp(1.0 + 0.8 * u + 0.5 * rng.normal()) : 0.0;
    }
    return f;
}

Flow attack_flow(Rng &rng) {
    Flow f;
    const double u = rng.normal();
    const double profile = rng.uniform();
    if (profile < 0.55) {
        // Generic DNS flood: query-sized packets, few answers, very short.
        f.family = "Generic";
        f.service = "dns";
        f.sttl = pick(rng, {{254, 0.9}, {31, 0.1}});
        f.dur = std::exp(-9.0 + 0.6 * u + 0.3 * rng.normal());
        f.spkts = 2;
        f.dpkts = rng.uniform() < 0.8 ? 0 : 1;
        f.smeansz = std::round(std::max(28.0, 58.0 + 6.0 * u + 3.0 * rng.normal()));
        f.dmeansz = f.dpkts > 0 ? std::round(100.0 + 20.0 * rng.normal()) : 0.0;
    } else if (profile < 0.85) {
        // Exploit over TCP.
        f.family = rng.uniform() < 0.6 ? "Exploits" : "DoS";
        f.service = rng.uniform() < 0.3 ? "ftp" : "-";
        f.sttl = pick(rng, {{62, 0.5}, {254, 0.4}, {31, 0.1}});
        tcp_sequence(rng, f);
        f.dur = std::exp(-0.5 + 1.0 * u + 0.3 * rng.normal());
        f.spkts = std::round(std::exp(2.2 + 0.6 * u)) + 2;
        f.dpkts = std::round(f.spkts * (0.3 + 0.5 * rng.uniform()));
        f.smeansz = std::round(200.0 + 600.0 * logistic(u + 0.5 * rng.normal()));
        f.dmeansz = std::round(40.0 + 200.0 * logistic(-u + 0.5 * rng.normal()));
        f.djit = std::exp(2.0 + 1.2 * u + 0.5 * rng.normal());
        f.trans_depth = rng.uniform() < 0.3 ? 1 : 0;
    } else {
        // Scans: tiny probes, no payload back.
        f.family = rng.uniform() < 0.7 ? "Reconnaissance" : "Fuzzers";
        f.service = "-";
        f.sttl = pick(rng, {{254, 0.6}, {62, 0.2}, {31, 0.2}});
        if (rng.uniform() < 0.5) {
            tcp_sequence(rng, f);
        }
        f.dur = std::exp(-4.0 + 1.0 * u + 0.3 * rng.normal());
        f.spkts = 1 + std::round(2.0 * rng.uniform());
        f.dpkts = rng.uniform() < 0.5 ? 1 : 0;
        f.smeansz = std::round(std::max(28.0, 50.0 + 20.0 * u));
        f.dmeansz = f.dpkts > 0 ? std::round(std::max(28.0, 45.0 + 10.0 * rng.normal())) : 0.0;
    }
    return f;
}

} // namespace

data::Dataset generate_flows(const FlowGeneratorConfig &config) {
    if (!(config.attack_rate > 0.0 && config.attack_rate < 1.0)) {
        throw ModelError("attack rate must lie in (0, 1)");
    }
    if (!(config.overlap >= 0.0 && config.overlap <= 1.0) ||
        !(config.foreign_service_rate >= 0.0 && config.foreign_service_rate <= 1.0)) {
        throw ModelError("overlap and foreign service rate must lie in [0, 1]");
    }
    Rng rng{config.seed};
    std::vector<data::FlowRecord> records;
    records.reserve(config.rows);
    for (std::size_t i = 0; i < config.rows; ++i) {
        const int label = rng.uniform() < config.attack_rate ? 1 : 0;
        const bool swapped = rng.uniform() < config.overlap;
        Flow f = (label == 1) != swapped ? attack_flow(rng) : normal_flow(rng);
        if (rng.uniform() < config.foreign_service_rate) {
            f.service = kForeignServices[rng.below(kForeignServices.size())];
        }

        const double bits_out = 8.0 * f.spkts * f.smeansz;
        const double bits_in = 8.0 * f.dpkts * f.dmeansz;
        data::FlowRecord r;
        r.id = i + 1;
        r.label = label;
        r.service = f.service;
        if (label == 1) {
            r.attack_family = f.family != nullptr ? f.family : "Fuzzers";
        }
        r.values = {f.dur,
                    f.sttl,
                    bits_out / f.dur,
                    bits_in / f.dur,
                    f.smeansz,
                    f.dmeansz,
                    f.stcpb,
                    f.dtcpb,
                    f.djit,
                    f.trans_depth};
        records.push_back(std::move(r));
    }
    return data::Dataset{std::make_shared<const std::vector<std::string>>(kFeatureNames),
                         std::move(records), "synthetic:" + std::to_string(config.seed)};
}

} // namespace nbcoded::synthetic
