#include "lapewc/serialize.hpp"

#include "lapewc/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>

namespace lapewc {

namespace {

Vector vector_from_json(const Json& j, const char* what) {
    if (!j.is_array()) throw ArgumentError(std::string(what) + ": expected an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ArgumentError(std::string(what) + ": entry " + std::to_string(i) + " is not a number");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

void require_schema(const Json& j, const char* kind) {
    if (!j.is_object() || !j.contains("schema_version") || j.at("schema_version") != kSchemaVersion) {
        throw ArgumentError(std::string(kind) + ": missing or unsupported schema_version");
    }
    if (j.value("kind", "") != kind) throw ArgumentError(std::string("expected kind '") + kind + "'");
}

}  // namespace

Json to_json(const ParamVector& v) { return vector_to_json(v.values()); }
Json to_json(const DiagPrecision& q) { return vector_to_json(q.values()); }

ParamVector param_vector_from_json(const Json& j) { return ParamVector(vector_from_json(j, "params")); }
DiagPrecision diag_precision_from_json(const Json& j) { return DiagPrecision(vector_from_json(j, "precision")); }

Json to_json(const Architecture& arch) {
    Json head = {{"kind", to_string(arch.head.kind)}};
    if (arch.head.kind == HeadKind::gaussian_regression) head["noise_variance"] = arch.head.noise_variance;
    return {{"layer_sizes", arch.layer_sizes}, {"activation", to_string(arch.activation)}, {"head", head},
            {"bias", arch.bias}};
}

Architecture architecture_from_json(const Json& j) {
    Architecture arch;
    arch.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    arch.activation = activation_from_string(j.at("activation").get<std::string>());
    const auto& head = j.at("head");
    arch.head.kind = head_from_string(head.at("kind").get<std::string>());
    arch.head.noise_variance = head.value("noise_variance", 1.0);
    arch.bias = j.value("bias", true);
    arch.validate();
    return arch;
}

Json to_json(const QuadraticPenalty& p) {
    return {{"label", p.label}, {"lambda", p.lambda}, {"center", to_json(p.center)}, {"precision", to_json(p.precision)}};
}

QuadraticPenalty penalty_from_json(const Json& j) {
    return QuadraticPenalty(param_vector_from_json(j.at("center")), diag_precision_from_json(j.at("precision")),
                            j.at("label").get<std::string>(), j.at("lambda").get<double>());
}

Json to_json(const ConsolidatedPosterior& state) {
    Json log = Json::array();
    for (const auto& e : state.task_log) log.push_back({{"id", e.id}, {"lambda", e.lambda}});
    return {{"schema_version", kSchemaVersion}, {"kind", "consolidated_posterior"}, {"lambda_prior", state.lambda_prior},
            {"anchor", to_json(state.anchor)},   {"precision", to_json(state.precision)},  {"task_log", log}};
}

ConsolidatedPosterior consolidated_from_json(const Json& j) {
    require_schema(j, "consolidated_posterior");
    ConsolidatedPosterior state{param_vector_from_json(j.at("anchor")), diag_precision_from_json(j.at("precision")),
                                j.at("lambda_prior").get<double>(), {}};
    require_same_size(state.anchor.size(), state.precision.size(), "consolidated anchor vs precision");
    for (const auto& e : j.at("task_log")) state.task_log.push_back({e.at("id").get<std::string>(), e.at("lambda").get<double>()});
    return state;
}

Json to_json(const PenaltyBank& bank) {
    Json ps = Json::array();
    for (const auto& p : bank.penalties) ps.push_back(to_json(p));
    return {{"schema_version", kSchemaVersion}, {"kind", "penalty_bank"}, {"dim", bank.dim},
            {"prior_precision", bank.prior_precision}, {"penalties", ps}};
}

PenaltyBank bank_from_json(const Json& j) {
    require_schema(j, "penalty_bank");
    PenaltyBank bank{j.at("dim").get<std::size_t>(), j.at("prior_precision").get<double>(), {}};
    for (const auto& p : j.at("penalties")) {
        auto penalty = penalty_from_json(p);
        require_same_size(penalty.center.size(), bank.dim, "bank penalty");
        bank.penalties.push_back(std::move(penalty));
    }
    return bank;
}

Json checkpoint_to_json(const Architecture& arch, const ParamVector& params) {
    require_same_size(params.size(), arch.param_count(), "checkpoint params vs architecture");
    return {{"schema_version", kSchemaVersion}, {"kind", "checkpoint"}, {"architecture", to_json(arch)},
            {"params", to_json(params)}};
}

std::pair<Architecture, ParamVector> checkpoint_from_json(const Json& j) {
    require_schema(j, "checkpoint");
    auto arch = architecture_from_json(j.at("architecture"));
    auto params = param_vector_from_json(j.at("params"));
    require_same_size(params.size(), arch.param_count(), "checkpoint params vs architecture");
    return {std::move(arch), std::move(params)};
}

std::string hex_bits(double x) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(x)));
    return buf;
}

double from_hex_bits(const std::string& s) {
    if (s.size() != 16) throw ArgumentError("hex bit pattern must have 16 digits");
    return std::bit_cast<double>(static_cast<std::uint64_t>(std::stoull(s, nullptr, 16)));
}

namespace {

std::string hex_array(const Vector& v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += hex_bits(v[i]);
    }
    return out + "]";
}

}  // namespace

std::string normalized_state(const ConsolidatedPosterior& state) {
    return "v" + std::to_string(kSchemaVersion) + ";single;prior=" + hex_bits(state.lambda_prior) +
           ";anchor=" + hex_array(state.anchor.values()) + ";precision=" + hex_array(state.precision.values());
}

std::string normalized_state(const PenaltyBank& bank) {
    std::string out = "v" + std::to_string(kSchemaVersion) + ";bank;prior=" + hex_bits(bank.prior_precision);
    for (const auto& p : bank.penalties) {
        out += ";penalty{lambda=" + hex_bits(p.lambda) + ";center=" + hex_array(p.center.values()) +
               ";precision=" + hex_array(p.precision.values()) + "}";
    }
    return out;
}

}  // namespace lapewc
