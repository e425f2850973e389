#include "dforge/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "dforge/calculus.hpp"
#include "dforge/errors.hpp"
#include "dforge/gaugeprin.hpp"
#include "dforge/numlab.hpp"
#include "json.hpp"

namespace dforge {
namespace {

using json = nlohmann::ordered_json;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string class_name(HamiltonianSystem::Constraint::Class c) {
  switch (c) {
    case HamiltonianSystem::Constraint::Class::first:
      return "first";
    case HamiltonianSystem::Constraint::Class::second:
      return "second";
    default:
      return "unknown";
  }
}

Expr apply_substitutions(Expr e, const std::vector<PowerSubstitution>& subs) {
  for (const auto& s : subs) {
    e = (s.power > 1) ? apply_power_substitution(e, s.atom, s.power, s.value)
                      : substitute_atom(e, s.atom, s.value);
  }
  return e;
}

// Renders a kernel-vector combination of labelled constraints, e.g.
// "C1 + (-phi/g)*C2".
std::string combination_string(const HamiltonianSystem& hs, const std::vector<Expr>& coeffs) {
  std::string out;
  for (std::size_t i = 0; i < coeffs.size() && i < hs.constraints.size(); ++i) {
    if (coeffs[i].is_zero()) continue;
    if (!out.empty()) out += " + ";
    if (coeffs[i].str() == "1")
      out += hs.constraints[i].label;
    else
      out += "(" + coeffs[i].str() + ")*" + hs.constraints[i].label;
  }
  return out.empty() ? "0" : out;
}

json empty_report(const std::string& model_name) {
  json j;
  j["schema"] = "1";
  j["model"] = {{"name", model_name},
                {"coordinates", json::array()},
                {"lagrangian", ""},
                {"h0", ""},
                {"h_total", ""}};
  j["momenta"] = json::array();
  j["constraints"] = json::array();
  j["multipliers"] = json::array();
  j["chain"] = json::array();
  j["gauge_results"] = json::array();
  j["witnesses"] = json::array();
  j["simulations"] = json::array();
  return j;
}

json base_report(const ModelFile& mf, const Analysis& an) {
  const auto& hs = an.hs;
  const auto& sy = *hs.syms;
  json j = empty_report(mf.model.name);

  json coords = json::array();
  for (AtomId c : mf.model.coordinates) coords.push_back(sy.display(c));
  j["model"]["coordinates"] = coords;
  j["model"]["lagrangian"] = mf.model.lagrangian.str();
  j["model"]["h0"] = hs.h0.str();
  j["model"]["h_total"] = hs.total_hamiltonian().str();

  for (const auto& [p, def] : hs.momentum_definitions)
    j["momenta"].push_back({{"name", sy.display(p)}, {"definition", def.str()}});

  for (const auto& c : hs.constraints)
    j["constraints"].push_back({{"expr", c.expr.str()},
                                {"stage", c.stage},
                                {"class", class_name(c.cls)},
                                {"origin", c.origin}});

  for (const auto& m : hs.multipliers) {
    json e;
    e["name"] = sy.display(m.atom);
    e["status"] = m.determined ? "determined" : "free";
    e["value"] = m.determined ? m.value.str() : "";
    e["by"] = m.determined_by;
    j["multipliers"].push_back(e);
  }

  for (const auto& line : an.chain.log) j["chain"].push_back(line);
  for (const auto& c : hs.constraints)
    j["chain"].push_back(c.label + ": " + class_name(c.cls) + " class");
  for (const auto& v : hs.first_class_combinations)
    j["chain"].push_back("first-class combination: " + combination_string(hs, v));
  return j;
}

// ---------------------------------------------------------------------------
// per-command handlers

void do_fixgauge(const PipelineOptions& opt, const ModelFile& mf, const Analysis& an, json& j) {
  std::vector<std::pair<std::string, Expr>> chosen;
  if (!opt.gauge.empty()) {
    for (const auto& g : mf.gauges)
      if (g.first == opt.gauge) chosen.push_back(g);
    if (chosen.empty())
      throw model_error("no gauge named '" + opt.gauge + "' in " + opt.models.front());
  } else {
    chosen = mf.gauges;
    if (chosen.empty())
      throw model_error("fixgauge needs a [gauges] section or --gauge selection");
  }

  GaugeFixResult g = fix_gauge(an.hs, chosen);

  json r;
  r["kind"] = "gauge_fixing";
  json names = json::array();
  for (const auto& c : chosen) names.push_back(c.first);
  r["gauges"] = names;
  json elim = json::array();
  for (const auto& [atom, value] : g.eliminations)
    elim.push_back(
        {{"atom", atom}, {"value", apply_substitutions(value, mf.substitutions).str()}});
  r["eliminations"] = elim;
  json rem = json::array();
  for (const auto& c : g.remaining)
    rem.push_back({{"expr", apply_substitutions(c.expr, mf.substitutions).str()},
                   {"class", class_name(c.cls)}});
  r["remaining"] = rem;
  json pairs = json::array();
  for (const auto& [q, p] : g.remaining_pairs)
    pairs.push_back({an.hs.syms->display(q), an.hs.syms->display(p)});
  r["pairs"] = pairs;
  r["log"] = g.log;
  j["gauge_results"].push_back(r);
}

void do_gauge(const PipelineOptions& opt, const ModelFile& mf, json& j, PipelineResult& res) {
  const LieGroupAction* act = nullptr;
  if (!opt.action.empty()) {
    act = &mf.action(opt.action);
  } else if (mf.actions.size() == 1) {
    act = &mf.actions.front();
  } else if (mf.actions.empty()) {
    throw model_error("the model file declares no [action] block to gauge");
  } else {
    throw model_error("several actions are declared; choose one with --action");
  }

  GaugeResult gr = gauge_lagrangian(mf.model, *act);

  ModelFile emitted;
  emitted.model = gr.gauged;
  bool carry = !gr.delta.variations.empty();
  for (const auto& [atom, ignored] : gr.delta.variations) {
    (void)ignored;
    carry = carry && std::find(gr.gauged.coordinates.begin(), gr.gauged.coordinates.end(),
                               atom) != gr.gauged.coordinates.end();
  }
  if (carry) emitted.transformations.push_back(gr.delta);
  std::ostringstream os;
  write_model_file(emitted, os);
  res.emitted_model = os.str();

  json r;
  r["kind"] = "gauging";
  r["action"] = act->name;
  r["model"] = gr.gauged.name;
  r["lagrangian"] = gr.gauged.lagrangian.str();
  r["gauge_coordinates"] = gr.gauge_coordinates;
  json covs = json::array();
  for (const auto& d : gr.covariant_derivatives) covs.push_back(d.str());
  r["covariant_derivatives"] = covs;
  json resids = json::array();
  for (const auto& d : gr.covariance_residuals) resids.push_back(d.str());
  r["covariance_residuals"] = resids;
  r["invariance_residual"] = gr.invariance_residual.str();
  r["log"] = gr.log;
  j["gauge_results"].push_back(r);
}

json do_equiv(const PipelineOptions& opt) {
  ModelFile m1 = load_model_file(opt.models[0]);
  ModelFile m2 = load_model_file(opt.models[1], m1.model.syms);
  if (m1.transformations.empty() || m2.transformations.empty())
    throw model_error("equiv needs a [transformation] block in each model file");
  const LocalTransformation& t1 = m1.transformations.front();
  const LocalTransformation& t2 = m2.transformations.front();

  EquivalenceReport er =
      local_structure_equiv(m1.model.lagrangian, t1, m2.model.lagrangian, t2);

  json j = empty_report(m1.model.name + " ~ " + m2.model.name);
  json w;
  w["models"] = m1.model.name + " ~ " + m2.model.name;
  w["transformations"] = t1.name + " ~ " + t2.name;
  w["difference"] = er.difference.str();
  w["exact"] = er.equivalent;
  w["primitive"] = er.exactness.primitive ? er.exactness.primitive->str() : "";
  w["note"] = er.exactness.note;
  json resid = json::array();
  for (const auto& [family, r] : er.exactness.residuals)
    if (!r.is_zero()) resid.push_back({{"family", family}, {"residual", r.str()}});
  w["residuals"] = resid;
  j["witnesses"].push_back(w);
  return j;
}

void do_simulate(const PipelineOptions& opt, const ModelFile& mf, const Analysis& an, json& j,
                 PipelineResult& res) {
  std::string stem;
  if (!opt.out.empty()) {
    std::filesystem::path p(opt.out);
    stem = (p.parent_path() / p.stem()).string();
  } else {
    stem = std::filesystem::path(opt.models.front()).stem().string();
  }
  if (mf.simulations.empty())
    throw model_error("the model file declares no [simulation] blocks");

  for (const auto& sim : mf.simulations) {
    NumericOptions nopt;
    nopt.drift_tol = opt.tol.value_or(sim.drift_tol);
    nopt.seed = opt.seed;
    const double tau0 = sim.tau0.get_d();
    const double tau1 = sim.tau1.get_d();
    const double step = opt.step.value_or(sim.step.get_d());

    std::vector<Trajectory> trajs;
    std::vector<std::string> run_names;
    for (const auto& run : sim.runs) {
      NumericModel nm(an.hs, mf.bindings, nopt);
      for (const auto& [name, e] : sim.observables) nm.add_observable(name, e);
      for (const auto& [name, e] : run.multipliers) nm.set_multiplier(name, tau_polynomial(e));

      std::vector<double> init(nm.state_names().size(), 0.0);
      for (const auto& [name, value] : sim.init) {
        auto it = std::find(nm.state_names().begin(), nm.state_names().end(), name);
        if (it == nm.state_names().end())
          throw numerical_error("simulation '" + sim.name + "' initializes unknown state '" +
                                name + "'");
        init[static_cast<std::size_t>(it - nm.state_names().begin())] = value.get_d();
      }

      Trajectory t = nm.integrate(init, tau0, tau1, step);
      std::string csv_name = stem + "_" + sim.name + "_" + run.name + ".csv";
      std::ostringstream os;
      write_csv(t, os);
      res.csv_files.emplace_back(csv_name, os.str());

      json s;
      s["simulation"] = sim.name;
      s["run"] = run.name;
      s["steps"] = t.taus.empty() ? 0 : t.taus.size() - 1;
      s["max_drift"] = fmt17(t.max_drift);
      s["flagged"] = t.drift_flagged;
      s["csv"] = csv_name;
      j["simulations"].push_back(s);
      if (t.drift_flagged) res.exit_code = 3;

      trajs.push_back(std::move(t));
      run_names.push_back(run.name);
    }

    if (trajs.size() >= 2) {
      auto cols = compare_orbits(trajs[0], trajs[1]);
      for (std::size_t a = 0; a < trajs.size(); ++a)
        for (std::size_t b = a + 1; b < trajs.size(); ++b) {
          if (a == 0 && b == 1) continue;
          auto more = compare_orbits(trajs[a], trajs[b]);
          for (std::size_t k = 0; k < cols.size(); ++k)
            cols[k].second = std::max(cols[k].second, more[k].second);
        }
      json c;
      c["simulation"] = sim.name;
      c["comparison"] = run_names;
      json devs = json::array();
      for (const auto& [name, d] : cols)
        devs.push_back({{"column", name}, {"max", fmt17(d)}});
      c["deviations"] = devs;
      j["simulations"].push_back(c);
    }
  }
}

// ---------------------------------------------------------------------------
// text rendering

void render_list(std::ostringstream& o, const json& arr, const char* indent) {
  for (const auto& line : arr) o << indent << line.get<std::string>() << "\n";
}

std::string render_text(const json& j) {
  std::ostringstream o;
  const json& m = j["model"];
  o << "model " << m["name"].get<std::string>() << "\n";
  if (!m["coordinates"].empty()) {
    o << "  coordinates:";
    for (const auto& c : m["coordinates"]) o << " " << c.get<std::string>();
    o << "\n";
  }
  if (!m["lagrangian"].get<std::string>().empty())
    o << "  L   = " << m["lagrangian"].get<std::string>() << "\n";
  if (!m["h0"].get<std::string>().empty())
    o << "  H0  = " << m["h0"].get<std::string>() << "\n";
  if (!m["h_total"].get<std::string>().empty())
    o << "  H_T = " << m["h_total"].get<std::string>() << "\n";

  if (!j["momenta"].empty()) {
    o << "momenta\n";
    for (const auto& p : j["momenta"])
      o << "  " << p["name"].get<std::string>() << " = " << p["definition"].get<std::string>()
        << "\n";
  }
  if (!j["constraints"].empty()) {
    o << "constraints\n";
    std::size_t n = 0;
    for (const auto& c : j["constraints"]) {
      o << "  C" << ++n << ": " << c["expr"].get<std::string>() << "  [stage "
        << c["stage"].get<int>() << ", " << c["class"].get<std::string>() << " class; "
        << c["origin"].get<std::string>() << "]\n";
    }
  }
  if (!j["multipliers"].empty()) {
    o << "multipliers\n";
    for (const auto& u : j["multipliers"]) {
      o << "  " << u["name"].get<std::string>() << ": " << u["status"].get<std::string>();
      if (u["status"].get<std::string>() == "determined")
        o << " by " << u["by"].get<std::string>() << ", value = "
          << u["value"].get<std::string>();
      o << "\n";
    }
  }
  if (!j["chain"].empty()) {
    o << "chain\n";
    render_list(o, j["chain"], "  ");
  }
  for (const auto& g : j["gauge_results"]) {
    if (g["kind"].get<std::string>() == "gauge_fixing") {
      o << "gauge fixing\n";
      o << "  gauges:";
      for (const auto& n : g["gauges"]) o << " " << n.get<std::string>();
      o << "\n";
      for (const auto& e : g["eliminations"])
        o << "  " << e["atom"].get<std::string>() << " = " << e["value"].get<std::string>()
          << "\n";
      if (!g["pairs"].empty()) {
        o << "  remaining pairs:";
        for (const auto& p : g["pairs"])
          o << " (" << p[0].get<std::string>() << ", " << p[1].get<std::string>() << ")";
        o << "\n";
      }
      o << "  remaining surface\n";
      for (const auto& r : g["remaining"])
        o << "    " << r["expr"].get<std::string>() << "  [" << r["class"].get<std::string>()
          << " class]\n";
      render_list(o, g["log"], "  ");
    } else {
      o << "gauging with action " << g["action"].get<std::string>() << "\n";
      o << "  model " << g["model"].get<std::string>() << "\n";
      o << "  L' = " << g["lagrangian"].get<std::string>() << "\n";
      if (!g["gauge_coordinates"].empty()) {
        o << "  gauge coordinates:";
        for (const auto& n : g["gauge_coordinates"]) o << " " << n.get<std::string>();
        o << "\n";
      }
      for (const auto& d : g["covariant_derivatives"])
        o << "  D: " << d.get<std::string>() << "\n";
      o << "  invariance residual = " << g["invariance_residual"].get<std::string>() << "\n";
      render_list(o, g["log"], "  ");
    }
  }
  for (const auto& w : j["witnesses"]) {
    o << "equivalence " << w["models"].get<std::string>() << "\n";
    o << "  transformations: " << w["transformations"].get<std::string>() << "\n";
    o << "  difference = " << w["difference"].get<std::string>() << "\n";
    o << "  exact: " << (w["exact"].get<bool>() ? "yes" : "no") << "\n";
    if (!w["primitive"].get<std::string>().empty())
      o << "  primitive F = " << w["primitive"].get<std::string>() << "\n";
    if (!w["note"].get<std::string>().empty())
      o << "  note: " << w["note"].get<std::string>() << "\n";
    for (const auto& r : w["residuals"])
      o << "  residual[" << r["family"].get<std::string>()
        << "] = " << r["residual"].get<std::string>() << "\n";
  }
  for (const auto& s : j["simulations"]) {
    if (s.contains("run")) {
      o << "simulation " << s["simulation"].get<std::string>() << "/"
        << s["run"].get<std::string>() << ": steps=" << s["steps"].get<std::size_t>()
        << " max_drift=" << s["max_drift"].get<std::string>()
        << (s["flagged"].get<bool>() ? " FLAGGED" : "") << " csv=" << s["csv"].get<std::string>()
        << "\n";
    } else {
      o << "simulation " << s["simulation"].get<std::string>() << " cross-run deviations\n";
      for (const auto& d : s["deviations"])
        o << "  " << d["column"].get<std::string>() << ": " << d["max"].get<std::string>()
          << "\n";
    }
  }
  return o.str();
}

}  // namespace

Analysis analyze_model(const ModelFile& mf) {
  Analysis an{legendre(mf.model), {}};
  an.chain = stabilize(an.hs);
  classify(an.hs);
  return an;
}

PipelineResult run_pipeline(const PipelineOptions& opt) {
  PipelineResult res;
  json j;

  if (opt.command == "equiv") {
    if (opt.models.size() != 2) throw model_error("equiv needs exactly two model files");
    j = do_equiv(opt);
  } else {
    if (opt.models.size() != 1)
      throw model_error("'" + opt.command + "' takes exactly one model file");
    ModelFile mf = load_model_file(opt.models.front());
    if (opt.command == "gauge") {
      Analysis an = analyze_model(mf);
      j = base_report(mf, an);
      do_gauge(opt, mf, j, res);
    } else if (opt.command == "analyze") {
      Analysis an = analyze_model(mf);
      j = base_report(mf, an);
    } else if (opt.command == "fixgauge") {
      Analysis an = analyze_model(mf);
      j = base_report(mf, an);
      do_fixgauge(opt, mf, an, j);
    } else if (opt.command == "simulate") {
      Analysis an = analyze_model(mf);
      j = base_report(mf, an);
      do_simulate(opt, mf, an, j, res);
    } else {
      throw model_error("unknown command '" + opt.command + "'");
    }
  }

  res.report = (opt.format == "json") ? j.dump(2) + "\n" : render_text(j);
  return res;
}

}  // namespace dforge
