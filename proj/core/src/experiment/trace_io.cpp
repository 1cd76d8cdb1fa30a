#include "uan/experiment/trace_io.hpp"

#include <cmath>
#include <cstdio>

namespace uan::experiment {

namespace {

void emit(const json& j, std::string& out) {
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += json(key).dump();
        out += ':';
        emit(value, out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        emit(j[i], out);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        break;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      break;
    }
    default:
      out += j.dump();
  }
}

json index_list(const IndexSet& s) { return json(s); }

}  // namespace

std::string dump_compact(const json& j) {
  std::string out;
  emit(j, out);
  return out;
}

json vector_json(const Vector& x) {
  json a = json::array();
  for (Index k = 0; k < x.size(); ++k) a.push_back(x[k]);
  return a;
}

json header_record(const ExperimentConfig& config, const IterationTrace& trace) {
  return {{"record", "header"},
          {"name", config.name},
          {"algorithm", trace.algorithm},
          {"dimension", trace.dim},
          {"seed", config.seed},
          {"x0", vector_json(trace.x0)},
          {"config", to_json(config)}};
}

json step_record(const TraceStep& s) {
  json j = {{"record", "step"},
            {"n", s.n},
            {"x", vector_json(s.x)},
            {"map", s.map},
            {"index", s.index},
            {"label", s.index_label},
            {"lambda", s.lambda},
            {"step_norm", s.step_norm},
            {"active", s.active_count}};
  if (s.residual) j["residual"] = *s.residual;
  if (!s.aux.empty()) {
    json aux = json::array();
    for (const auto& v : s.aux) aux.push_back(vector_json(v));
    j["aux"] = aux;
  }
  return j;
}

json summary_record(const IterationTrace& t) {
  json j = {{"record", "summary"},
            {"status", to_string(t.status)},
            {"iterations", t.iterations()},
            {"final", vector_json(t.final_point)},
            {"classification", to_string(t.classification)},
            {"active", index_list(t.active)},
            {"fixing", index_list(t.fixing)}};
  if (!t.recurring.empty()) j["recurring"] = index_list(t.recurring);
  if (t.admissible) j["admissible"] = *t.admissible;
  if (t.shadow) j["shadow"] = vector_json(*t.shadow);
  if (!t.set_residuals.empty()) j["set_residuals"] = t.set_residuals;
  if (t.memberships_ok) j["memberships_ok"] = *t.memberships_ok;
  if (t.local_min) j["local_min"] = *t.local_min;
  if (t.objective) j["objective"] = *t.objective;
  if (!t.sweep_points.empty()) j["sweeps"] = t.sweep_points.size() - 1;
  if (!t.notes.empty()) j["notes"] = t.notes;
  return j;
}

void write_trace(std::ostream& out, const ExperimentConfig& config, const IterationTrace& trace) {
  out << dump_compact(header_record(config, trace)) << '\n';
  for (const auto& s : trace.steps) out << dump_compact(step_record(s)) << '\n';
  out << dump_compact(summary_record(trace)) << '\n';
}

}  // namespace uan::experiment
