#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "alin/alin.hpp"
#include "alin/errors.hpp"

// JSON-lines trace: one object per outer iteration.

namespace alin {

inline void to_json(nlohmann::json& j, const IterationRecord& r) {
    j = nlohmann::json{{"k", r.k},
                       {"objective", r.objective},
                       {"model_value", r.model_value},
                       {"accepted_h", r.accepted_h},
                       {"accepted_f", r.accepted_f},
                       {"kkt_inf_norm", r.kkt_inf_norm},
                       {"cg_iters", r.cg_iters},
                       {"boxqp_cycles", r.boxqp_cycles}};
}

inline void from_json(const nlohmann::json& j, IterationRecord& r) {
    j.at("k").get_to(r.k);
    j.at("objective").get_to(r.objective);
    j.at("model_value").get_to(r.model_value);
    j.at("accepted_h").get_to(r.accepted_h);
    j.at("accepted_f").get_to(r.accepted_f);
    j.at("kkt_inf_norm").get_to(r.kkt_inf_norm);
    j.at("cg_iters").get_to(r.cg_iters);
    j.at("boxqp_cycles").get_to(r.boxqp_cycles);
}

inline void write_trace_jsonl(const std::vector<IterationRecord>& trace, std::ostream& out) {
    for (const auto& r : trace) out << nlohmann::json(r).dump() << '\n';
}

inline std::vector<IterationRecord> read_trace_jsonl(std::istream& in) {
    std::vector<IterationRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(nlohmann::json::parse(line).get<IterationRecord>());
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("trace: ") + e.what(), lineno);
        }
    }
    return out;
}

}  // namespace alin
