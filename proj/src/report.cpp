#include "netctrl/report.hpp"

#include <chrono>
#include <sstream>

namespace netctrl {
namespace {

using ojson = nlohmann::ordered_json;

const char* filter_name(ModeFilter f) { return f == ModeFilter::Unstable ? "unstable" : "all"; }
const char* test_name(ControllabilityTest t) { return t == ControllabilityTest::Stacked ? "stacked" : "pbh"; }

ojson mode_check_json(const ModeCheck& c) {
  ojson j;
  j["lambda"] = eigenvalue_to_json(c.lambda);
  j["M_r"] = c.M_r;
  j["achieved"] = c.achieved;
  j["fum"] = c.fum();
  j["exact"] = c.exact;
  return j;
}

ojson positions_1based(const std::vector<Position>& links) {
  ojson out = ojson::array();
  for (auto [r, c] : links) out.push_back({r + 1, c + 1});
  return out;
}

// Names of the SCM rows (v) and columns (z) in the n-ACG vocabulary.
struct ScmNames {
  std::vector<std::string> v, z;
};

ScmNames scm_names(const std::vector<SubsystemModel>& subsystems) {
  std::vector<AugmentedSubsystem> parts;
  for (const auto& s : subsystems) parts.push_back(analysis_form(s));
  SignalLayout layout = signal_layout(parts);
  ScmNames n;
  for (std::size_t r = 0; r < layout.n_v0; ++r) {
    const std::size_t g = layout.v_of_scm_row(r);
    auto [sub, local] = layout.locate_v(g);
    n.v.push_back(vertex_name({VertexKind::InternalInput, sub + 1, local + 1, g}));
  }
  for (std::size_t c = 0; c < layout.n_z0; ++c) {
    const std::size_t g = layout.z_of_scm_col(c);
    auto [sub, local] = layout.locate_z(g);
    n.z.push_back(vertex_name({VertexKind::InternalOutput, sub + 1, local + 1, g}));
  }
  return n;
}

ojson links_json(const std::vector<Position>& links, const ScmNames& names) {
  ojson out = ojson::array();
  for (auto [r, c] : links) {
    ojson l;
    l["position"] = {r + 1, c + 1};
    l["link"] = names.z[c] + " -> " + names.v[r];
    out.push_back(std::move(l));
  }
  return out;
}

ojson pattern_json(const StructuredPattern& p) {
  ojson j;
  j["rows"] = p.rows();
  j["cols"] = p.cols();
  j["positions"] = positions_1based(p.positions());
  j["grid"] = pattern_grid(p);
  return j;
}

void render_text(const ojson& j, const std::string& indent, std::ostringstream& os);

bool is_scalar_list(const ojson& j) {
  for (const auto& e : j) {
    if (e.is_object()) return false;
    if (e.is_array()) {
      for (const auto& f : e)
        if (f.is_structured()) return false;
    }
  }
  return true;
}

std::string scalar_text(const ojson& j) { return j.is_string() ? j.get<std::string>() : j.dump(); }

void render_text(const ojson& j, const std::string& indent, std::ostringstream& os) {
  for (const auto& [key, value] : j.items()) {
    if (value.is_object()) {
      os << indent << key << ":\n";
      render_text(value, indent + "  ", os);
    } else if (value.is_array() && !is_scalar_list(value)) {
      os << indent << key << ":\n";
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (value[i].is_object()) {
          os << indent << "  - " << i + 1 << "\n";
          render_text(value[i], indent + "    ", os);
        } else {
          os << indent << "  - " << value[i].dump() << "\n";
        }
      }
    } else if (value.is_array() && key == "grid") {
      os << indent << key << ":\n";
      for (const auto& row : value) os << indent << "  " << row.get<std::string>() << "\n";
    } else {
      os << indent << key << ": " << scalar_text(value) << "\n";
    }
  }
}

VerifyOptions resolve_options(const CommandRequest& req, const NdsDocument& doc) {
  VerifyOptions o;
  o.eig_tol = req.eig_tol.value_or(doc.options.eig_tol.value_or(kDefaultEigTol));
  o.rank_tol = req.rank_tol.value_or(doc.options.rank_tol.value_or(kDefaultRankTol));
  o.seed = req.seed.value_or(doc.options.seed.value_or(1));
  o.jobs = std::max<std::size_t>(1, req.jobs);
  o.modes = req.modes;
  return o;
}

}  // namespace

std::optional<Command> parse_command(const std::string& name) {
  if (name == "check") return Command::Check;
  if (name == "design") return Command::Design;
  if (name == "realize") return Command::Realize;
  if (name == "graph") return Command::Graph;
  if (name == "feasible") return Command::Feasible;
  return std::nullopt;
}

std::string command_name(Command c) {
  switch (c) {
    case Command::Check: return "check";
    case Command::Design: return "design";
    case Command::Realize: return "realize";
    case Command::Graph: return "graph";
    case Command::Feasible: return "feasible";
  }
  return "check";
}

std::vector<std::string> pattern_grid(const StructuredPattern& p) {
  std::vector<std::string> out;
  for (std::size_t r = 0; r < p.rows(); ++r) {
    std::string row;
    for (std::size_t c = 0; c < p.cols(); ++c) {
      if (c) row += ' ';
      row += p.is_free(r, c) ? '*' : '0';
    }
    out.push_back(std::move(row));
  }
  return out;
}

nlohmann::ordered_json eigenvalue_to_json(const Eigenvalue& e) {
  ojson j;
  if (e.exact) {
    j["exact"] = rational_to_json(*e.exact);
  } else {
    j["re"] = e.value.real();
    j["im"] = e.value.imag();
  }
  return j;
}

nlohmann::ordered_json verdict_to_json(const Verdict& v) {
  ojson j;
  j["structurally_controllable"] = v.structurally_controllable;
  j["mode_filter"] = filter_name(v.options.modes);
  ojson spec = ojson::array();
  for (const auto& e : v.spectrum) spec.push_back(eigenvalue_to_json(e));
  j["spectrum"] = std::move(spec);
  if (v.pdum) {
    j["pdum"] = {{"cycle", v.pdum->names}};
  } else {
    j["pdum"] = nullptr;
  }
  if (v.unreachable_lambda_edge) {
    j["unreachable_lambda_edge"] = {v.unreachable_lambda_edge->first, v.unreachable_lambda_edge->second};
  } else {
    j["unreachable_lambda_edge"] = nullptr;
  }
  ojson fums = ojson::array();
  for (const auto& c : v.fums) fums.push_back(eigenvalue_to_json(c.lambda));
  j["fums"] = std::move(fums);
  ojson per = ojson::array();
  for (const auto& c : v.per_mode) per.push_back(mode_check_json(c));
  j["per_mode"] = std::move(per);
  j["well_posedness"] = {{"well_posed", v.well_posedness.well_posed},
                         {"trials_run", v.well_posedness.trials_run},
                         {"seed", v.well_posedness.seed}};
  return j;
}

nlohmann::ordered_json feasibility_to_json(const FeasibilityReport& f) {
  ojson j;
  j["feasible"] = f.feasible;
  j["subsystems_controllable_with_links"] = f.condition_i;
  j["per_subsystem"] = f.controllable_with_links;
  j["enough_outputs"] = f.condition_ii;
  j["M_z"] = f.M_z;
  j["max_M_r"] = f.max_M_r;
  j["input_reaches_outputs"] = f.condition_iii;
  j["some_gzu_nonzero"] = f.some_gzu_nonzero;
  j["some_lambda_edge"] = f.some_lambda_edge;
  return j;
}

nlohmann::ordered_json design_to_json(const DesignResult& d) {
  ojson j;
  j["mode_filter"] = filter_name(d.mode_filter);
  j["feasible"] = d.feasible;
  j["feasibility"] = feasibility_to_json(d.feasibility);
  ojson modes = ojson::array();
  for (std::size_t i = 0; i < d.modes.size(); ++i) {
    modes.push_back({{"lambda", eigenvalue_to_json(d.modes[i])}, {"M_r", i < d.M_r.size() ? d.M_r[i] : 0}});
  }
  j["modes"] = std::move(modes);
  if (!d.feasible) return j;
  j["j_grd"] = d.greedy.j_grd;
  j["j_grd_order"] = d.greedy.order;
  j["cover_sets"] = d.cover_sets;
  ojson col;
  col["precolored"] = d.coloring.precolored;
  col["order"] = d.coloring.order;
  ojson colors = ojson::object();
  for (const auto& [v, c] : d.coloring.colors) colors[std::to_string(v)] = c;
  col["colors"] = std::move(colors);
  ojson removed = ojson::array();
  for (auto [a, b] : d.coloring.removed) removed.push_back({a, b});
  col["removed_edges"] = std::move(removed);
  j["coloring"] = std::move(col);
  j["stage1_links"] = positions_1based(d.stage1_links);
  j["stage2_links"] = positions_1based(d.stage2_links);
  j["phi"] = pattern_json(d.phi);
  const BoundReport& b = d.bound_report;
  j["bound_report"] = {{"links", b.links},   {"M_rmax", b.M_rmax}, {"M_def", b.M_def},   {"p_ius", b.p_ius},
                       {"j_grd_size", b.j_grd_size}, {"factor", b.factor}, {"bound", b.bound}, {"holds", b.holds()}};
  if (d.verdict) j["verdict"] = verdict_to_json(*d.verdict);
  return j;
}

nlohmann::ordered_json realization_to_json(const RealizationResult& r) {
  ojson j;
  j["witness_found"] = r.witness_found;
  j["trials_run"] = r.trials_run;
  j["redraws"] = r.redraws;
  j["value_set_size"] = r.value_set_size;
  j["seed"] = r.seed;
  ojson w = ojson::array();
  for (const auto& [id, value] : r.witness) w.push_back({{"parameter", id}, {"value", rational_to_json(value)}});
  j["witness"] = std::move(w);
  ojson u = ojson::array();
  for (const auto& e : r.uncontrollable_modes) u.push_back(eigenvalue_to_json(e));
  j["uncontrollable_modes"] = std::move(u);
  return j;
}

CommandOutput run_command(const CommandRequest& req) {
  NdsDocument doc;
  try {
    doc = load_document(req.path);
  } catch (const DocumentError& e) {
    CommandOutput out;
    out.diagnostics.push_back(std::string("error: ") + (e.where() == req.path ? "" : req.path + ": ") + e.what());
    return out;
  }
  return run_command(req, doc);
}

CommandOutput run_command(const CommandRequest& req, const NdsDocument& doc) {
  CommandOutput out;
  for (const auto& w : doc.warnings) out.diagnostics.push_back("warning: " + w);
  const auto start = std::chrono::steady_clock::now();
  try {
    const VerifyOptions opts = resolve_options(req, doc);
    const ScmNames names = scm_names(doc.model.subsystems);

    if (req.command == Command::Graph) {
      LumpedPlant plant = assemble_lumped(doc.model, false);
      std::vector<SubsystemTfms> tfms;
      for (const auto& p : plant.parts) tfms.push_back(subsystem_tfms(p));
      out.body = to_dot(build_nacg(plant.parts, tfms, plant.P_pattern));
      out.exit_code = kExitPositive;
      return out;
    }

    ojson report;
    report["command"] = command_name(req.command);
    ojson args;
    args["file"] = req.path;
    args["modes"] = filter_name(req.modes);
    args["seed"] = opts.seed;
    args["trials"] = req.trials;
    args["tol"] = opts.rank_tol;
    args["eig_tol"] = opts.eig_tol;
    args["jobs"] = opts.jobs;
    if (req.command == Command::Realize) args["test"] = test_name(req.test);
    report["arguments"] = std::move(args);
    report["model_digest"] = model_digest(doc);
    report["warnings"] = doc.warnings;

    bool positive = false;
    switch (req.command) {
      case Command::Check: {
        Verdict v = check_structural_controllability(doc.model, opts);
        positive = v.structurally_controllable;
        report["result"] = verdict_to_json(v);
        break;
      }
      case Command::Design: {
        ojson r;
        try {
          DesignResult d = design_topology(doc.model.subsystems, req.modes, opts);
          positive = d.feasible && d.verdict && d.verdict->structurally_controllable;
          r = design_to_json(d);
          if (d.feasible) {
            r["stage1_links"] = links_json(d.stage1_links, names);
            r["stage2_links"] = links_json(d.stage2_links, names);
          }
        } catch (const DesignError& e) {
          r["feasible"] = false;
          r["error"] = e.what();
        }
        report["result"] = std::move(r);
        break;
      }
      case Command::Realize: {
        RealizationResult r = randomized_realization_check(doc.model, opts.seed, std::max<std::size_t>(1, req.trials), req.test);
        positive = r.witness_found;
        report["result"] = realization_to_json(r);
        break;
      }
      case Command::Feasible: {
        FeasibilityReport f = check_feasibility(doc.model.subsystems, opts);
        positive = f.feasible;
        report["result"] = feasibility_to_json(f);
        break;
      }
      case Command::Graph:
        break;
    }
    if (req.timing) {
      const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      report["wall_time_ms"] = ms;
    }
    out.exit_code = positive ? kExitPositive : kExitNegative;
    if (req.format == Format::Json) {
      out.body = report.dump(2) + "\n";
    } else {
      std::ostringstream os;
      render_text(report, "", os);
      out.body = os.str();
    }
  } catch (const std::exception& e) {
    out.exit_code = kExitError;
    out.body.clear();
    out.diagnostics.push_back(std::string("error: ") + e.what());
  }
  return out;
}

}  // namespace netctrl
