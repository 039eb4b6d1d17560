#include "collarcurv/report.hpp"

#include <iomanip>
#include <sstream>

namespace collarcurv {

nlohmann::json CheckResult::to_json() const {
    return {{"name", name}, {"pass", pass}, {"residual", residual}};
}

nlohmann::json SampleRef::to_json() const {
    return {{"xi", xi}, {"s", s}, {"t", t}, {"node", node}};
}

bool VerificationReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

nlohmann::ordered_json VerificationReport::to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["inputs_digest"] = inputs_digest;
    j["sampling"] = sampling;
    j["min_margin"] = min_margin;
    nlohmann::ordered_json cs = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        nlohmann::ordered_json e;
        e["name"] = c.name;
        e["pass"] = c.pass;
        e["residual"] = c.residual;
        cs.push_back(e);
    }
    j["checks"] = cs;
    j["constants"] = constants;
    nlohmann::ordered_json w;
    w["xi"] = worst.xi;
    w["s"] = worst.s;
    w["t"] = worst.t;
    w["node"] = worst.node;
    j["worst_sample"] = w;
    return j;
}

std::string VerificationReport::to_string() const { return to_json().dump(2) + "\n"; }

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string digest_hex(const std::string& data) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(data);
    return os.str();
}

} // namespace collarcurv
