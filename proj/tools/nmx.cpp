// nmx: command-line front end. Exit codes: 0 pass, 1 reject/fail, 2 usage or format error,
// 3 budget exhausted.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nmx/circuits.hpp"
#include "nmx/derivation.hpp"
#include "nmx/formula.hpp"
#include "nmx/frege.hpp"
#include "nmx/interp.hpp"
#include "nmx/natded.hpp"
#include "nmx/schemas.hpp"
#include "nmx/semantics.hpp"
#include "nmx/tautgen.hpp"
#include "nmx/transforms.hpp"

using namespace nmx;
namespace fs = std::filesystem;

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kBudget = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::ostringstream s;
    s << std::cin.rdbuf();
    return s.str();
  }
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
}

Derivation load_proof(const std::string& path) { return read_proof_string(read_file(path)); }

std::vector<Formula> load_formulas(const std::string& path) {
  if (path.empty()) return {};
  std::istringstream in(read_file(path));
  return read_formula_lines(in);
}

std::string metrics_table(const ProofMetrics& m) {
  std::ostringstream s;
  s << "lines " << m.lines << "\nsize " << m.size << "\nheight " << m.height << "\nformula_size " << m.formula_size
    << "\ninferential_size " << m.inferential_size << '\n';
  return s.str();
}

std::string report_text(const TransformReport& r) {
  std::ostringstream s;
  s << "transform " << r.transform << "\nverdict " << r.verdict.describe() << "\n";
  s << "metric input output\n";
  auto row = [&](const char* name, std::uint64_t a, std::uint64_t b) { s << name << ' ' << a << ' ' << b << '\n'; };
  row("lines", r.input.lines, r.output.lines);
  row("size", r.input.size, r.output.size);
  row("height", r.input.height, r.output.height);
  row("formula_size", r.input.formula_size, r.output.formula_size);
  row("inferential_size", r.input.inferential_size, r.output.inferential_size);
  for (const auto& [k, v] : r.fitted) s << "fit " << k << ' ' << v << '\n';
  for (const auto& n : r.notes) s << "note " << n << '\n';
  return s.str();
}

std::string default_out_dir(const std::string& given, const std::string& fallback) {
  if (!given.empty()) return given;
  if (const char* env = std::getenv("NMX_OUT_DIR")) return (fs::path(env) / fallback).string();
  return fallback;
}

struct Options {
  int n = 0;
  std::uint64_t seed = 1;
  std::uint64_t budget_nodes = 1'000'000;
  int budget_bits = 21;
  std::string mode = "basic";
  std::string out;
  std::string kind, system, proof, assumptions, goal, from, to, discharge, circuit, assign, u = "u";
};

// ---- commands ----

int cmd_gen(const Options& o) {
  if (o.kind == "tau") {
    auto t = build_tau(o.n);
    std::ostringstream s;
    s << render(t.tau) << '\n';
    auto table = [&](const char* name, const std::vector<std::string>& v) {
      s << "# " << name;
      for (const auto& x : v) s << ' ' << x;
      s << '\n';
    };
    s << "# n " << t.n << "\n# k " << t.k << '\n';
    table("p", t.p);
    table("pp", t.pp);
    table("q", t.q);
    table("r", t.r);
    s << "# u " << t.u << "\n# v " << t.v << "\n# w " << t.w << '\n';
    if (o.out.empty()) {
      std::cout << s.str();
    } else {
      write_file(fs::path(o.out) / "tau.txt", s.str());
      write_file(fs::path(o.out) / "alpha.txt", render(t.alpha) + "\n");
      write_file(fs::path(o.out) / "beta.txt", render(t.beta) + "\n");
      std::cout << "wrote tau.txt, alpha.txt, beta.txt to " << o.out << '\n';
    }
    return kPass;
  }
  auto cc = make_cc(o.n);
  std::cout << "n " << cc.n << "\nk " << cc.k << "\nedges " << cc.edges.size() << "\nvars";
  for (const auto& v : cc.vars) std::cout << ' ' << v;
  std::cout << '\n';
  return kPass;
}

CheckReport check_any(const std::string& system, const std::string& proof_path, const FormulaSet& gamma,
                      const std::string& goal_text, Formula* goal_out = nullptr) {
  if (system == "frege-seq") {
    auto lines = load_formulas(proof_path);
    if (lines.empty()) throw FormatError("empty sequence proof");
    Formula goal = goal_text.empty() ? lines.back() : parse_formula(goal_text);
    if (goal_out) *goal_out = goal;
    return check_frege_seq(lines, gamma, goal);
  }
  Derivation d = load_proof(proof_path);
  Formula goal = goal_text.empty() ? d.labels[d.root] : parse_formula(goal_text);
  if (goal_out) *goal_out = goal;
  return system == "nm" ? check_nm(d, gamma, goal) : check_frege_dag(d, gamma, goal);
}

int cmd_check(const Options& o) {
  auto gs = load_formulas(o.assumptions);
  auto rep = check_any(o.system, o.proof, FormulaSet(gs.begin(), gs.end()), o.goal);
  std::cout << rep.describe() << '\n';
  return rep ? kPass : kFail;
}

int cmd_decide(const Options& o) {
  auto gamma = load_formulas(o.assumptions);
  Formula goal = parse_formula(o.goal);
  DecideOptions opt;
  opt.budget = o.budget_nodes;
  auto r = decide(gamma, goal, opt);
  std::cout << "verdict " << verdict_name(r.verdict) << "\nstates " << r.states << '\n';
  if (r.verdict == Verdict::Budget) return kBudget;
  if (r.verdict == Verdict::Valid) {
    auto rep = check_nm(*r.proof, FormulaSet(gamma.begin(), gamma.end()), goal);
    if (!rep) {
      std::cout << "recheck " << rep.describe() << '\n';
      return kFail;
    }
    std::cout << "proof_nodes " << r.proof->node_count() << '\n';
    if (!o.out.empty()) write_file(fs::path(o.out) / "proof.txt", proof_to_string(*r.proof));
    return kPass;
  }
  Forcing f(*r.countermodel);
  bool refutes = !f(r.countermodel_world, goal);
  for (const auto& g : gamma) refutes = refutes && f(r.countermodel_world, g);
  std::cout << "countermodel_worlds " << r.countermodel->worlds() << "\ncountermodel_world " << r.countermodel_world
            << "\ncountermodel_recheck " << (refutes ? "refutes" : "FAILS") << '\n';
  if (!o.out.empty()) {
    std::ostringstream s;
    write_kripke(s, *r.countermodel);
    s << "# refuting world " << r.countermodel_world << '\n';
    write_file(fs::path(o.out) / "countermodel.txt", s.str());
  }
  return kFail;
}

int cmd_translate(const Options& o) {
  auto gs = load_formulas(o.assumptions);
  FormulaSet gamma(gs.begin(), gs.end());
  Derivation in;
  if (o.from == "frege-seq") {
    auto lines = load_formulas(o.proof);
    if (lines.empty()) throw FormatError("empty sequence proof");
    in = seq_to_dag(lines, gamma);
  } else {
    in = load_proof(o.proof);
  }
  Formula goal = o.goal.empty() ? in.labels[in.root] : parse_formula(o.goal);
  const bool from_nm = o.from == "nm";
  TransformReport report;
  Derivation out;
  std::string out_system;
  if (from_nm && o.to == "frege") {
    auto r = nm_to_frege(in, gamma, goal, o.mode == "ret" ? NmToFregeMode::Ret : NmToFregeMode::Basic);
    report = r.report, out = std::move(r.proof), out_system = "frege";
  } else if (from_nm && (o.to == "frege-tree" || o.to == "nm-tree")) {
    auto r = nm_to_tree(in, gamma, goal);
    report = r.report;
    out = o.to == "nm-tree" ? std::move(r.nm) : std::move(r.frege);
    out_system = o.to == "nm-tree" ? "nm" : "frege";
  } else if (!from_nm && o.to == "nm") {
    auto r = frege_to_nm(in, gamma, goal);
    report = r.report, out = std::move(r.proof), out_system = "nm";
  } else if (!from_nm && o.to == "frege-tree") {
    auto r = frege_dag_to_tree(in, gamma, goal);
    report = r.report, out = std::move(r.proof), out_system = "frege";
  } else if (!from_nm && o.to == "frege" && !o.discharge.empty()) {
    auto moved = FormulaSeq::from_list(load_formulas(o.discharge));
    FormulaSet delta;
    for (const auto& g : gamma) delta.insert(g);
    for (const auto& e : moved.entries()) delta.erase(e.formula);
    auto r = deduction(in, moved, delta);
    goal = fold_imp(moved, goal);
    for (const auto& e : moved.entries()) gamma.erase(e.formula);
    report = r.report, out = std::move(r.proof), out_system = "frege";
  } else {
    throw UsageError("unsupported translation " + o.from + " -> " + o.to +
                     " (frege -> frege needs --discharge)");
  }
  // every written proof is rechecked independently of the transform's own check
  auto rep = out_system == "nm" ? check_nm(out, gamma, goal) : check_frege_dag(out, gamma, goal);
  std::cout << report_text(report) << "recheck " << rep.describe() << "\nseed " << o.seed << '\n';
  if (!rep) return kFail;
  if (!o.out.empty()) write_file(o.out, proof_to_string(out));
  return kPass;
}

int cmd_extract(const Options& o) {
  Derivation d = load_proof(o.proof);
  if (o.kind == "disjunct") {
    int i = extract_disjunct(d, o.u);
    std::cout << "disjunct " << i << '\n';
    return kPass;
  }
  auto inst = build_tau(o.n);
  auto shape = make_shape(inst);
  auto ex = extract_interpolant(d, shape);
  auto itp = check_interpolates(ex.circuit, shape);
  std::cout << "formulas " << ex.f.size() << "\nclosure_wires " << ex.closure.circuit.size() << "\nbound "
            << ex.closure.bound << "\ninterpolant_wires " << ex.circuit.size() << "\ninterpolates "
            << (itp ? "yes" : "NO: " + itp.message) << '\n';
  if (!o.out.empty()) write_file(o.out, circuit_to_string(ex.circuit));
  return itp ? kPass : kFail;
}

Assignment parse_assignment(const std::string& text) {
  Assignment a;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("assignment item '" + item + "' is not name=0|1");
    std::string v = trim(item.substr(eq + 1));
    if (v != "0" && v != "1") throw UsageError("assignment value for " + item.substr(0, eq) + " must be 0 or 1");
    a[trim(item.substr(0, eq))] = v == "1";
  }
  return a;
}

int cmd_circuit(const Options& o) {
  MonotoneCircuit c = read_circuit_string(read_file(o.circuit));
  if (o.kind == "eval") {
    std::cout << (eval_circuit(c, parse_assignment(o.assign)) ? 1 : 0) << '\n';
    return kPass;
  }
  if (o.kind == "fanin2") {
    auto d = to_bounded_fanin(c);
    std::cout << "wires " << c.size() << " -> " << d.size() << "\ngates " << c.gate_count() << " -> " << d.gate_count()
              << "\nmax_fanin " << d.max_fanin() << '\n';
    if (!o.out.empty()) write_file(o.out, circuit_to_string(d));
    return kPass;
  }
  auto rep = check_separates(c, o.n, o.budget_bits, 100000, o.seed);
  std::cout << "separates " << (rep ? "yes" : "NO: " + rep.message) << "\nexhaustive " << (rep.exhaustive ? "yes" : "no")
            << "\ngraphs " << rep.side0 << " colourable, " << rep.side1 << " with a clique\nseed " << o.seed << '\n';
  return rep ? kPass : kFail;
}

int cmd_metrics(const Options& o) {
  auto gs = load_formulas(o.assumptions);
  FormulaSet gamma(gs.begin(), gs.end());
  if (o.system == "frege-seq") {
    std::cout << metrics_table(frege_metrics(load_formulas(o.proof), gamma));
    return kPass;
  }
  Derivation d = load_proof(o.proof);
  std::cout << metrics_table(o.system == "nm" ? nm_metrics(d) : frege_metrics(d)) << "tree " << (is_tree(d) ? "yes" : "no")
            << '\n';
  return kPass;
}

int cmd_pipeline(const Options& o) {
  const fs::path dir = default_out_dir(o.out, "pipeline_tau" + std::to_string(o.n));
  std::ostringstream log;
  auto stage = [&](const std::string& name, const std::string& result) {
    log << name << ' ' << result << '\n';
    std::cout << name << ' ' << result << '\n';
  };
  auto finish = [&](const std::string& verdict, int code) {
    stage("verdict", verdict);
    stage("seed", std::to_string(o.seed));
    write_file(dir / "report.txt", log.str());
    return code;
  };
  auto inst = build_tau(o.n);
  write_file(dir / "tau.txt", render(inst.tau) + "\n");
  stage("tau_size", std::to_string(inst.tau.size()));
  Derivation proof;
  if (o.proof.empty()) {
    auto v = validate_formula(inst.tau, o.budget_nodes);
    stage("decide", verdict_name(v.verdict));
    if (v.verdict == Verdict::Budget) return finish("BUDGET", kBudget);
    if (v.verdict != Verdict::Valid) return finish("FAIL", kFail);
    proof = std::move(*v.proof);
  } else {
    proof = load_proof(o.proof);
    stage("proof", "loaded from " + o.proof);
  }
  write_file(dir / "proof.txt", proof_to_string(proof));
  auto rep = check_nm(proof, {}, inst.tau);
  stage("recheck", rep.describe());
  if (!rep) return finish("FAIL", kFail);
  auto shape = make_shape(inst);
  auto ex = extract_interpolant(proof, shape);
  write_file(dir / "interpolant.txt", circuit_to_string(ex.circuit));
  stage("interpolant_wires", std::to_string(ex.circuit.size()));
  auto cc = specialize_to_cc(ex.circuit, o.n);
  write_file(dir / "cc_circuit.txt", circuit_to_string(cc));
  auto sep = check_separates(cc, o.n, o.budget_bits, 100000, o.seed);
  stage("separates", sep ? (sep.exhaustive ? "yes (exhaustive)" : "yes (sampled)") : "NO: " + sep.message);
  if (!sep) return finish("FAIL", kFail);
  auto itp = check_interpolates(ex.circuit, shape);
  stage("interpolates", itp ? "yes (exhaustive)" : "NO: " + itp.message);
  if (!itp) return finish("FAIL", kFail);
  return finish("PASS", kPass);
}

int cmd_schemas(const Options& o) {
  const fs::path dir = default_out_dir(o.out, "schemas");
  std::ostringstream index;
  for (const auto& s : schema_catalogue()) {
    const auto& t = named_schema(s.name);
    FormulaSet gamma(t.premises.begin(), t.premises.end());
    auto rep = check_frege_dag(t.proof, gamma, t.conclusion);
    if (!rep) {
      std::cout << s.name << ' ' << rep.describe() << '\n';
      return kFail;
    }
    write_file(dir / (s.name + ".proof"), proof_to_string(t.proof));
    index << s.name << " |";
    for (const auto& p : t.premises) index << ' ' << render(p) << " ;";
    index << " |- " << render(t.conclusion) << " | lines " << t.proof.node_count() << '\n';
  }
  write_file(dir / "index.txt", index.str());
  std::cout << index.str();
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nmx: proofs, translations and interpolants for implicational intuitionistic logic"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--seed", o.seed, "seed for sampled checks")->capture_default_str();

  auto* gen = app.add_subcommand("gen", "generate tau_n or the clique-colouring pair");
  gen->add_option("kind", o.kind)->required()->check(CLI::IsMember({"tau", "cc"}));
  gen->add_option("--n", o.n)->required();
  gen->add_option("--out", o.out, "directory for tau.txt, alpha.txt, beta.txt");

  auto* check = app.add_subcommand("check", "check a proof file");
  check->add_option("--system", o.system)->required()->check(CLI::IsMember({"nm", "frege-seq", "frege-dag"}));
  check->add_option("--proof", o.proof)->required();
  check->add_option("--assumptions", o.assumptions, "formula-per-line file");
  check->add_option("--goal", o.goal, "defaults to the proof's conclusion");

  auto* dec = app.add_subcommand("decide", "decide Gamma |- phi, with a proof or a countermodel");
  dec->add_option("--goal", o.goal)->required();
  dec->add_option("--assumptions", o.assumptions);
  dec->add_option("--budget-nodes", o.budget_nodes)->capture_default_str();
  dec->add_option("--out", o.out, "directory for proof.txt or countermodel.txt");

  auto* tr = app.add_subcommand("translate", "translate between NM and Frege proofs");
  tr->add_option("--from", o.from)->required()->check(CLI::IsMember({"nm", "frege", "frege-seq"}));
  tr->add_option("--to", o.to)->required()->check(CLI::IsMember({"nm", "frege", "frege-tree", "nm-tree"}));
  tr->add_option("--mode", o.mode)->check(CLI::IsMember({"basic", "ret"}))->capture_default_str();
  tr->add_option("--proof", o.proof)->required();
  tr->add_option("--assumptions", o.assumptions);
  tr->add_option("--goal", o.goal);
  tr->add_option("--discharge", o.discharge, "frege -> frege: formulas moved into the conclusion, in order");
  tr->add_option("--out", o.out, "output proof file");

  auto* ex = app.add_subcommand("extract", "extract a disjunct or a tau_n interpolant");
  ex->add_option("kind", o.kind)->required()->check(CLI::IsMember({"disjunct", "interpolant"}));
  ex->add_option("--proof", o.proof)->required();
  ex->add_option("--u", o.u, "disjunct: the variable u")->capture_default_str();
  ex->add_option("--n", o.n, "interpolant: the tau_n the proof proves");
  ex->add_option("--out", o.out, "interpolant circuit file");

  auto* circ = app.add_subcommand("circuit", "evaluate, convert or check monotone circuits");
  circ->add_option("kind", o.kind)->required()->check(CLI::IsMember({"eval", "fanin2", "separate"}));
  circ->add_option("--circuit", o.circuit)->required();
  circ->add_option("--assign", o.assign, "eval: name=0|1,...");
  circ->add_option("--n", o.n, "separate: clique-colouring size");
  circ->add_option("--budget-bits", o.budget_bits, "separate: exhaustive up to this many edges")->capture_default_str();
  circ->add_option("--out", o.out, "fanin2: output circuit file");

  auto* met = app.add_subcommand("metrics", "proof metrics");
  met->add_option("--system", o.system)->required()->check(CLI::IsMember({"nm", "frege-seq", "frege-dag"}));
  met->add_option("--proof", o.proof)->required();
  met->add_option("--assumptions", o.assumptions);

  auto* pipe = app.add_subcommand("pipeline", "build, prove, extract and verify");
  pipe->add_option("kind", o.kind)->required()->check(CLI::IsMember({"tau"}));
  pipe->add_option("--n", o.n)->required();
  pipe->add_option("--budget-nodes", o.budget_nodes)->capture_default_str();
  pipe->add_option("--budget-bits", o.budget_bits)->capture_default_str();
  pipe->add_option("--proof", o.proof, "use this NM proof instead of running decide");
  pipe->add_option("--out", o.out, "artifact directory (default $NMX_OUT_DIR/pipeline_tauN)");

  auto* sch = app.add_subcommand("schemas", "write the schema template catalogue");
  sch->add_option("--out", o.out, "directory (default $NMX_OUT_DIR/schemas)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }
  try {
    if (*gen) return cmd_gen(o);
    if (*check) return cmd_check(o);
    if (*dec) return cmd_decide(o);
    if (*tr) return cmd_translate(o);
    if (*ex) {
      if (o.kind == "interpolant" && o.n < 2) throw UsageError("extract interpolant needs --n >= 2");
      return cmd_extract(o);
    }
    if (*circ) {
      if (o.kind == "eval" && o.assign.empty()) throw UsageError("circuit eval needs --assign");
      if (o.kind == "separate" && o.n < 1) throw UsageError("circuit separate needs --n");
      return cmd_circuit(o);
    }
    if (*met) return cmd_metrics(o);
    if (*pipe) return cmd_pipeline(o);
    if (*sch) return cmd_schemas(o);
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget: " << e.what() << '\n';
    return kBudget;
  } catch (const UsageError& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const FormatError& e) {
    std::cerr << "format: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "format: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return kFail;
  }
  return kUsage;
}
