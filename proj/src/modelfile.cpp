#include "dforge/modelfile.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace dforge {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

struct RawSection {
  std::string kind, name;
  std::vector<std::pair<int, std::string>> lines;  // line number, content
};

std::vector<RawSection> split_sections(std::istream& in, const std::string& file) {
  std::vector<RawSection> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    int start = lineno;
    std::string full = line;
    while (!full.empty() && full.back() == '\\') {
      full.pop_back();
      if (!std::getline(in, line)) break;
      ++lineno;
      full += line;
    }
    std::string t = trim(full);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw model_error(file + ":" + std::to_string(start) + ": unterminated section header");
      std::string head = trim(t.substr(1, t.size() - 2));
      auto ws = words(head);
      if (ws.empty())
        throw model_error(file + ":" + std::to_string(start) + ": empty section header");
      RawSection s;
      s.kind = ws[0];
      for (std::size_t i = 1; i < ws.size(); ++i) s.name += (i > 1 ? " " : "") + ws[i];
      out.push_back(std::move(s));
      continue;
    }
    if (out.empty())
      throw model_error(file + ":" + std::to_string(start) + ": content before any [section]");
    out.back().lines.emplace_back(start, t);
  }
  return out;
}

std::pair<std::string, std::string> split_eq(const std::string& line, const std::string& where) {
  std::size_t p = line.find('=');
  if (p == std::string::npos) throw model_error(where + ": expected 'key = value' in '" + line + "'");
  return {trim(line.substr(0, p)), trim(line.substr(p + 1))};
}

// [[a,b],[c,d]] of expressions
std::vector<std::vector<Expr>> parse_matrix(SymbolsPtr syms, const std::string& text,
                                            const std::string& where) {
  std::vector<std::vector<Expr>> rows;
  std::size_t i = 0;
  auto fail = [&](const std::string& m) -> void { throw model_error(where + ": " + m); };
  auto skip = [&] { while (i < text.size() && std::isspace((unsigned char)text[i])) ++i; };
  skip();
  if (i >= text.size() || text[i] != '[') fail("matrix must start with '['");
  ++i;
  while (true) {
    skip();
    if (i >= text.size()) fail("unterminated matrix");
    if (text[i] == ']') { ++i; break; }
    if (text[i] == ',') { ++i; continue; }
    if (text[i] != '[') fail("expected '[' to open a row");
    std::size_t j = ++i;
    int depth = 0;
    std::vector<Expr> row;
    std::size_t entry = j;
    for (;; ++j) {
      if (j >= text.size()) fail("unterminated row");
      char c = text[j];
      if (c == '(' || c == '[') ++depth;
      if (c == ')') --depth;
      if (c == ']' && depth > 0) { --depth; continue; }
      if ((c == ',' && depth == 0) || (c == ']' && depth == 0)) {
        std::string cell = trim(text.substr(entry, j - entry));
        if (cell.empty()) fail("empty matrix entry");
        row.push_back(parse_expression(syms, cell));
        entry = j + 1;
        if (c == ']') break;
      }
    }
    i = j + 1;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

mpq_class parse_exact_number(const std::string& text) {
  std::string t = trim(text);
  if (t.empty()) throw model_error("empty numeric literal");
  bool neg = false;
  if (t[0] == '+' || t[0] == '-') {
    neg = t[0] == '-';
    t = t.substr(1);
  }
  auto digits = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit((unsigned char)c); });
  };
  mpq_class v;
  if (auto dot = t.find('.'); dot != std::string::npos) {
    std::string ip = dot ? t.substr(0, dot) : "0", fp = t.substr(dot + 1);
    if (ip.empty()) ip = "0";
    if (!digits(ip) || !digits(fp)) throw model_error("bad decimal literal '" + text + "'");
    mpz_class scale = 1;
    for (std::size_t i = 0; i < fp.size(); ++i) scale *= 10;
    v = mpq_class(mpz_class(ip) * scale + mpz_class(fp.empty() ? "0" : fp), scale);
  } else if (auto sl = t.find('/'); sl != std::string::npos) {
    std::string np = t.substr(0, sl), dp = t.substr(sl + 1);
    if (!digits(np) || !digits(dp) || dp == "0")
      throw model_error("bad rational literal '" + text + "'");
    v = mpq_class(mpz_class(np), mpz_class(dp));
  } else {
    if (!digits(t)) throw model_error("bad integer literal '" + text + "'");
    v = mpq_class(mpz_class(t));
  }
  v.canonicalize();
  return neg ? mpq_class(-v) : v;
}

const LocalTransformation& ModelFile::transformation(const std::string& name) const {
  for (const auto& t : transformations)
    if (t.name == name) return t;
  throw model_error("model '" + model.name + "' has no transformation named '" + name + "'");
}

const LieGroupAction& ModelFile::action(const std::string& name) const {
  for (const auto& a : actions)
    if (a.name == name) return a;
  throw model_error("model '" + model.name + "' has no action named '" + name + "'");
}

ModelFile parse_model_file(std::istream& in, const std::string& display_name, SymbolsPtr share) {
  auto sections = split_sections(in, display_name);
  ModelFile mf;
  SymbolsPtr syms = share ? share : std::make_shared<Symbols>();
  mf.model.syms = syms;

  auto where = [&](int line) { return display_name + ":" + std::to_string(line); };
  auto resolve_atom = [&](const std::string& name, int line) {
    auto id = syms->resolve(name, 0);
    if (!id) throw model_error(where(line) + ": unknown atom '" + name + "'");
    return *id;
  };

  // declarations first, independent of section order in the file
  auto pass = [&](const std::string& kind, auto&& fn) {
    for (const auto& s : sections)
      if (s.kind == kind) fn(s);
  };

  pass("model", [&](const RawSection& s) {
    for (const auto& [ln, line] : s.lines) {
      auto [k, v] = split_eq(line, where(ln));
      if (k == "name") mf.model.name = v;
      else throw model_error(where(ln) + ": unknown model key '" + k + "'");
    }
  });
  if (mf.model.name.empty()) throw model_error(display_name + ": missing [model] name");

  pass("coordinates", [&](const RawSection& s) {
    for (const auto& [ln, line] : s.lines)
      for (const std::string& w : words(line)) {
        mf.model.coordinates.push_back(syms->intern(AtomKind::coordinate, w));
        syms->intern(AtomKind::momentum, "p_" + w);
      }
  });
  pass("parameters", [&](const RawSection& s) {
    for (const auto& [ln, line] : s.lines)
      for (const std::string& w : words(line)) syms->intern(AtomKind::parameter, w);
  });
  pass("assumptions", [&](const RawSection& s) {
    for (const auto& [ln, line] : s.lines) {
      auto [k, v] = split_eq(line, where(ln));
      for (const std::string& w : words(v)) {
        if (k == "nonzero") mf.model.assumptions.declare_nonzero(w);
        else if (k == "positive") mf.model.assumptions.declare_positive(w);
        else throw model_error(where(ln) + ": unknown assumption kind '" + k + "'");
      }
    }
  });
  pass("metric", [&](const RawSection& s) {
    for (const auto& [ln, line] : s.lines) {
      auto [k, v] = split_eq(line, where(ln));
      if (k != "signature") throw model_error(where(ln) + ": unknown metric key '" + k + "'");
      for (const std::string& w : words(v)) {
        if (w == "+") mf.model.metric_signature.push_back(1);
        else if (w == "-") mf.model.metric_signature.push_back(-1);
        else throw model_error(where(ln) + ": signature entries are '+' or '-'");
      }
    }
  });
  pass("lagrangian", [&](const RawSection& s) {
    for (const auto& [ln, line] : s.lines) {
      auto [k, v] = split_eq(line, where(ln));
      if (k != "L") throw model_error(where(ln) + ": the lagrangian section defines 'L'");
      try {
        mf.model.lagrangian = parse_expression(syms, v);
      } catch (const kernel_error& e) {
        throw model_error(where(ln) + ": " + e.what());
      }
    }
  });
  if (!mf.model.lagrangian.symbols())
    throw model_error(display_name + ": missing [lagrangian] section");

  pass("transformation", [&](const RawSection& s) {
    LocalTransformation t;
    t.name = s.name;
    if (t.name.empty()) throw model_error(display_name + ": transformation sections need a name");
    for (const auto& [ln, line] : s.lines) {
      auto [k, v] = split_eq(line, where(ln));
      if (k == "gauge") {
        for (const std::string& w : words(v)) {
          syms->intern(AtomKind::gauge_function, w, 0);
          t.gauge_functions.push_back(w);
        }
        continue;
      }
      try {
        t.variations.emplace_back(resolve_atom(k, ln), parse_expression(syms, v));
      } catch (const kernel_error& e) {
        throw model_error(where(ln) + ": " + e.what());
      }
    }
    mf.transformations.push_back(std::move(t));
  });

  pass("action", [&](const RawSection& s) {
    LieGroupAction a;
    a.name = s.name;
    if (a.name.empty()) throw model_error(display_name + ": action sections need a name");
    std::vector<std::pair<std::string, std::vector<std::vector<Expr>>>> gens;
    ExternalFieldSpec field;
    bool has_field = false;
    for (const auto& [ln, line] : s.lines) {
      auto [k, v] = split_eq(line, where(ln));
      auto kw = words(k);
      if (k == "kind") {
        if (v == "phase") a.kind = ActionKind::phase;
        else if (v == "matrix") a.kind = ActionKind::matrix;
        else throw model_error(where(ln) + ": action kind is 'phase' or 'matrix'");
      } else if (k == "params") {
        a.params = words(v);
      } else if (k == "sector") {
        for (const std::string& w : words(v)) a.sector.push_back(resolve_atom(w, ln));
      } else if (kw.size() == 2 && kw[0] == "generator") {
        gens.emplace_back(kw[1], parse_matrix(syms, v, where(ln)));
      } else if (k == "external_field") {
        field.components = words(v);
        has_field = true;
      } else if (k == "charge") {
        field.charge = v;
        has_field = true;
      } else if (k == "mass") {
        field.mass = v;
        has_field = true;
      } else {
        throw model_error(where(ln) + ": unknown action key '" + k + "'");
      }
    }
    for (const std::string& p : a.params) {
      bool found = a.kind == ActionKind::phase;
      for (auto& [name, m] : gens)
        if (name == p) {
          a.generators.push_back(m);
          found = true;
        }
      if (!found)
        throw model_error(display_name + ": action '" + a.name + "' lacks a generator for '" +
                          p + "'");
    }
    if (has_field) {
      if (field.charge.empty() || field.mass.empty())
        throw model_error(display_name + ": external_field needs charge and mass keys");
      a.external_field = field;
    }
    mf.actions.push_back(std::move(a));
  });

  pass("gauges", [&](const RawSection& s) {
    for (const auto& [ln, line] : s.lines) {
      auto [k, v] = split_eq(line, where(ln));
      try {
        mf.gauges.emplace_back(k, parse_expression(syms, v));
      } catch (const kernel_error& e) {
        throw model_error(where(ln) + ": " + e.what());
      }
    }
  });

  pass("substitutions", [&](const RawSection& s) {
    for (const auto& [ln, line] : s.lines) {
      auto [k, v] = split_eq(line, where(ln));
      PowerSubstitution ps;
      std::string base = k;
      if (auto caret = k.find('^'); caret != std::string::npos) {
        base = trim(k.substr(0, caret));
        ps.power = std::stoi(trim(k.substr(caret + 1)));
        if (ps.power < 1) throw model_error(where(ln) + ": substitution power must be >= 1");
      }
      ps.atom = resolve_atom(base, ln);
      ps.value = parse_expression(syms, v);
      mf.substitutions.push_back(std::move(ps));
    }
  });

  pass("bind", [&](const RawSection& s) {
    for (const auto& [ln, line] : s.lines) {
      auto [k, v] = split_eq(line, where(ln));
      mf.bindings.emplace_back(k, parse_exact_number(v));
    }
  });

  pass("simulation", [&](const RawSection& s) {
    SimulationSpec sim;
    sim.name = s.name;
    if (sim.name.empty()) throw model_error(display_name + ": simulation sections need a name");
    for (const auto& [ln, line] : s.lines) {
      if (line.rfind("run ", 0) == 0) {
        std::size_t colon = line.find(':');
        if (colon == std::string::npos)
          throw model_error(where(ln) + ": run lines look like 'run NAME: mult = expr, ...'");
        SimulationSpec::Run run;
        run.name = trim(line.substr(4, colon - 4));
        std::string rest = trim(line.substr(colon + 1));
        std::size_t start = 0;
        while (start < rest.size()) {
          std::size_t comma = rest.find(',', start);
          std::string item = trim(rest.substr(start, comma == std::string::npos
                                                          ? std::string::npos
                                                          : comma - start));
          if (!item.empty()) {
            auto [mk, mv] = split_eq(item, where(ln));
            run.multipliers.emplace_back(mk, parse_expression(syms, mv));
          }
          if (comma == std::string::npos) break;
          start = comma + 1;
        }
        sim.runs.push_back(std::move(run));
        continue;
      }
      auto [k, v] = split_eq(line, where(ln));
      auto kw = words(k);
      if (k == "grid") {
        auto g = words(v);
        if (g.size() != 3) throw model_error(where(ln) + ": grid = tau0 tau1 step");
        sim.tau0 = parse_exact_number(g[0]);
        sim.tau1 = parse_exact_number(g[1]);
        sim.step = parse_exact_number(g[2]);
      } else if (k == "init") {
        for (const std::string& w : words(v)) {
          auto [ik, iv] = split_eq(w, where(ln));
          sim.init.emplace_back(ik, parse_exact_number(iv));
        }
      } else if (kw.size() == 2 && kw[0] == "observable") {
        sim.observables.emplace_back(kw[1], parse_expression(syms, v));
      } else if (k == "drift_tol") {
        sim.drift_tol = std::strtod(v.c_str(), nullptr);
        if (!(sim.drift_tol > 0)) throw model_error(where(ln) + ": drift_tol must be positive");
      } else {
        throw model_error(where(ln) + ": unknown simulation key '" + k + "'");
      }
    }
    mf.simulations.push_back(std::move(sim));
  });

  for (const auto& s : sections) {
    static const std::set<std::string> known{"model",       "coordinates",   "parameters",
                                             "assumptions", "metric",        "lagrangian",
                                             "transformation", "action",     "gauges",
                                             "substitutions", "bind",        "simulation"};
    if (!known.count(s.kind))
      throw model_error(display_name + ": unknown section '[" + s.kind + "]'");
  }
  return mf;
}

ModelFile load_model_file(const std::string& path, SymbolsPtr share) {
  std::ifstream in(path);
  if (!in) throw model_error("cannot open model file '" + path + "'");
  return parse_model_file(in, path, std::move(share));
}

void write_model_file(const ModelFile& mf, std::ostream& os) {
  const ModelSpec& m = mf.model;
  const Symbols& syms = *m.syms;
  os << "[model]\nname = " << m.name << "\n\n";

  os << "[coordinates]\n";
  for (std::size_t i = 0; i < m.coordinates.size(); ++i)
    os << (i ? " " : "") << syms.at(m.coordinates[i]).name;
  os << "\n\n";

  std::set<std::string> params;
  auto scan = [&](const Expr& e) {
    if (!e.symbols()) return;
    for (AtomId id : e.atoms())
      if (syms.at(id).kind == AtomKind::parameter) params.insert(syms.at(id).name);
  };
  scan(m.lagrangian);
  for (const auto& t : mf.transformations)
    for (const auto& [id, e] : t.variations) scan(e);
  for (const auto& [name, e] : mf.gauges) scan(e);
  if (!params.empty()) {
    os << "[parameters]\n";
    bool first = true;
    for (const auto& p : params) {
      os << (first ? "" : " ") << p;
      first = false;
    }
    os << "\n\n";
  }

  auto flags = m.assumptions.names_with_flags();
  std::string nz, pos;
  for (const auto& [name, positive] : flags) (positive ? pos : nz) += " " + name;
  if (!nz.empty() || !pos.empty()) {
    os << "[assumptions]\n";
    if (!nz.empty()) os << "nonzero =" << nz << "\n";
    if (!pos.empty()) os << "positive =" << pos << "\n";
    os << "\n";
  }

  if (!m.metric_signature.empty()) {
    os << "[metric]\nsignature =";
    for (int sgn : m.metric_signature) os << " " << (sgn > 0 ? "+" : "-");
    os << "\n\n";
  }

  os << "[lagrangian]\nL = " << m.lagrangian.str() << "\n";

  for (const auto& t : mf.transformations) {
    std::string name;
    for (char c : t.name) name += (std::isalnum((unsigned char)c) || c == '_') ? c : '_';
    os << "\n[transformation " << name << "]\n";
    if (!t.gauge_functions.empty()) {
      os << "gauge =";
      for (const auto& g : t.gauge_functions) os << " " << g;
      os << "\n";
    }
    for (const auto& [id, e] : t.variations) os << syms.display(id) << " = " << e.str() << "\n";
  }

  if (!mf.gauges.empty()) {
    os << "\n[gauges]\n";
    for (const auto& [name, e] : mf.gauges) os << name << " = " << e.str() << "\n";
  }
  if (!mf.bindings.empty()) {
    os << "\n[bind]\n";
    for (const auto& [name, q] : mf.bindings) os << name << " = " << q.get_str() << "\n";
  }
}

}  // namespace dforge
