#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>

#include "cmall/cutelim.hpp"
#include "cmall/search.hpp"
#include "cmall/semantics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cmall;

namespace {

struct Options {
  std::string variant = "cmall";
  int max_depth = 12;
  int max_structural = 4;
  std::string universe_file;
  std::string out_file;
  bool as_json = false;
};

CalculusVariant variant_of(const Options& opt) {
  return opt.variant == "naive" ? CalculusVariant::NaiveLazyMLL : CalculusVariant::CMALL;
}

SearchLimits limits_of(const Options& opt) {
  SearchLimits lim;
  lim.max_depth = opt.max_depth;
  lim.max_structural_run = opt.max_structural;
  return lim;
}

unsigned thread_cap() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CMALL_THREADS")) {
    long n = std::strtol(env, nullptr, 10);
    if (n >= 1 && static_cast<unsigned>(n) < hw) return static_cast<unsigned>(n);
  }
  return hw;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

/// A .mseq file: optional `#expect proved|refuted` / `#variant cmall|naive`
/// headers, `#` comments, then the multisequent.
struct SequentFile {
  Multisequent goal;
  std::string expect;  // empty when no header
  std::optional<CalculusVariant> variant;
  std::optional<int> max_depth, max_structural;
};

SequentFile load_sequent(const std::string& path) {
  SequentFile sf;
  std::istringstream in(read_file(path));
  std::string line, body;
  while (std::getline(in, line)) {
    if (line.rfind("#expect ", 0) == 0) {
      sf.expect = line.substr(8);
    } else if (line.rfind("#max-depth ", 0) == 0) {
      sf.max_depth = std::atoi(line.c_str() + 11);
    } else if (line.rfind("#max-structural ", 0) == 0) {
      sf.max_structural = std::atoi(line.c_str() + 16);
    } else if (line.rfind("#variant ", 0) == 0) {
      std::string v = line.substr(9);
      if (v == "cmall")
        sf.variant = CalculusVariant::CMALL;
      else if (v == "naive")
        sf.variant = CalculusVariant::NaiveLazyMLL;
      else
        throw std::runtime_error(path + ": unknown variant " + v);
    } else if (!line.empty() && line[0] == '#') {
      // comment
    } else {
      body += line + "\n";
    }
  }
  sf.goal = parse_multisequent(body);
  return sf;
}

void collect_atoms(const Formula& f, std::set<std::string>& atoms) {
  switch (f.kind()) {
    case Formula::Kind::Atom: atoms.insert(f.atom_name()); break;
    case Formula::Kind::Const: break;
    case Formula::Kind::Bin:
      collect_atoms(f.left(), atoms);
      collect_atoms(f.right(), atoms);
      break;
    case Formula::Kind::Mod: collect_atoms(f.body(), atoms); break;
  }
}

/// Deterministic valuation: the i-th atom (alphabetically) is the fact
/// generated by the (i mod #generators)-th generator monomial.
PhaseStructure structure_for(const Universe& u, const Multisequent& s, const std::string& name) {
  if (u.generators.empty()) throw std::runtime_error("universe has no generators");
  std::set<std::string> atoms;
  for (const auto& [o, f] : s.occs) collect_atoms(f, atoms);
  PhaseStructure ps;
  ps.universe = u;
  ps.name = name;
  std::size_t i = 0;
  for (const auto& atom : atoms) {
    MonoidElem m = monoid_unit(u);
    m.exp[i++ % u.generators.size()] = 1;
    ps.valuation[atom] = make_fact(u, {fock_of(m)});
  }
  return ps;
}

void print_header(const Options& opt, const std::string& verb) {
  std::cout << "# cmall " << verb << " variant=" << opt.variant
            << " max-depth=" << opt.max_depth << " max-structural=" << opt.max_structural
            << " universe-degree=" << Universe{}.max_fock_degree
            << " threads=" << thread_cap() << "\n";
}

json header_json(const Options& opt, const std::string& verb) {
  return json{{"verb", verb},
              {"variant", opt.variant},
              {"max_depth", opt.max_depth},
              {"max_structural", opt.max_structural},
              {"universe_degree", Universe{}.max_fock_degree},
              {"threads", thread_cap()}};
}

const char* outcome_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Proved: return "Proved";
    case OutcomeKind::Refuted: return "Refuted";
    default: return "Unknown";
  }
}

const char* validity_name(Validity v) {
  switch (v) {
    case Validity::Valid: return "Valid";
    case Validity::Invalid: return "Invalid";
    default: return "Unknown";
  }
}

int run_prove(const Options& opt, const std::string& file) {
  SequentFile sf = load_sequent(file);
  CalculusVariant v = sf.variant.value_or(variant_of(opt));
  SearchLimits lim = limits_of(opt);
  if (sf.max_depth) lim.max_depth = *sf.max_depth;
  if (sf.max_structural) lim.max_structural_run = *sf.max_structural;
  SearchOutcome oc = prove(v, sf.goal, lim);
  std::string expect = sf.expect.empty() ? "proved" : sf.expect;
  bool met = (oc.kind == OutcomeKind::Proved && expect == "proved") ||
             (oc.kind == OutcomeKind::Refuted && expect == "refuted");
  std::string proof_path;
  if (oc.kind == OutcomeKind::Proved) {
    proof_path = opt.out_file.empty() ? fs::path(file).replace_extension(".proof").string()
                                      : opt.out_file;
    write_file(proof_path, serialize_proof(*oc.proof));
  }
  if (opt.as_json) {
    json j = header_json(opt, "prove");
    j["file"] = file;
    j["outcome"] = outcome_name(oc.kind);
    j["visited"] = oc.visited;
    j["expect"] = expect;
    if (!oc.reason.empty()) j["reason"] = oc.reason;
    if (!proof_path.empty()) j["proof"] = proof_path;
    std::cout << j.dump(2) << "\n";
  } else {
    print_header(opt, "prove");
    std::cout << file << ": " << outcome_name(oc.kind) << " (visited " << oc.visited << ")";
    if (!oc.reason.empty()) std::cout << " -- " << oc.reason;
    std::cout << "\n";
    if (!proof_path.empty()) std::cout << "proof written to " << proof_path << "\n";
  }
  return met ? 0 : 1;
}

int run_check(const Options& opt, const std::string& file) {
  ProofTree p = deserialize_proof(read_file(file));
  try {
    ProofStats st = check_proof(variant_of(opt), p);
    if (opt.as_json) {
      json j = header_json(opt, "check");
      j["file"] = file;
      j["ok"] = true;
      j["height"] = st.height;
      j["nodes"] = st.nodes;
      j["cut_count"] = st.cut_count;
      std::cout << j.dump(2) << "\n";
    } else {
      print_header(opt, "check");
      std::cout << file << ": OK height=" << st.height << " nodes=" << st.nodes
                << " cuts=" << st.cut_count << "\n";
    }
    return 0;
  } catch (const CheckError& e) {
    if (opt.as_json) {
      json j = header_json(opt, "check");
      j["file"] = file;
      j["ok"] = false;
      j["error"] = e.what();
      std::cout << j.dump(2) << "\n";
    } else {
      print_header(opt, "check");
      std::cout << file << ": FAIL " << e.what() << "\n";
    }
    return 1;
  }
}

int run_eliminate(const Options& opt, const std::string& file) {
  CalculusVariant v = variant_of(opt);
  ProofTree p = deserialize_proof(read_file(file));
  ProofStats before = check_proof(v, p);
  ProofTree q = eliminate_cuts(v, p);
  ProofStats after = check_proof(v, q);
  std::string out = opt.out_file.empty() ? fs::path(file).replace_extension(".cutfree.proof").string()
                                         : opt.out_file;
  write_file(out, serialize_proof(q));
  if (opt.as_json) {
    json j = header_json(opt, "eliminate");
    j["file"] = file;
    j["cuts_before"] = before.cut_count;
    j["cuts_after"] = after.cut_count;
    j["out"] = out;
    std::cout << j.dump(2) << "\n";
  } else {
    print_header(opt, "eliminate");
    std::cout << file << ": cuts " << before.cut_count << " -> " << after.cut_count
              << ", written to " << out << "\n";
  }
  return after.cut_count == 0 ? 0 : 1;
}

int run_validate(const Options& opt, const std::string& file) {
  SequentFile sf = load_sequent(file);
  Universe u = load_universe(opt.universe_file);
  PhaseStructure ps = structure_for(u, sf.goal, fs::path(opt.universe_file).stem().string());
  ValidityReport rep = is_valid(ps, sf.goal);
  if (opt.as_json) {
    json j = header_json(opt, "validate");
    j["file"] = file;
    j["universe"] = opt.universe_file;
    j["outcome"] = validity_name(rep.outcome);
    j["assignments"] = rep.assignments;
    j["overflowed"] = rep.overflowed;
    j["vacuous"] = rep.vacuous;
    if (!rep.violation.empty()) j["violation"] = rep.violation;
    std::cout << j.dump(2) << "\n";
  } else {
    print_header(opt, "validate");
    std::cout << file << " in " << ps.name << ": " << validity_name(rep.outcome)
              << " (assignments " << rep.assignments << ", overflowed " << rep.overflowed << ")";
    if (rep.vacuous) std::cout << " [vacuous]";
    if (!rep.violation.empty()) std::cout << "\n  violation: " << rep.violation;
    std::cout << "\n";
  }
  return rep.outcome == Validity::Valid ? 0 : 1;
}

int run_countermodel(const Options& opt, const std::string& file) {
  SequentFile sf = load_sequent(file);
  auto cm = countermodel_search(sf.goal);
  if (opt.as_json) {
    json j = header_json(opt, "countermodel");
    j["file"] = file;
    j["found"] = cm.has_value();
    if (cm) j["structure"] = cm->name;
    std::cout << j.dump(2) << "\n";
  } else {
    print_header(opt, "countermodel");
    if (cm)
      std::cout << file << ": countermodel found in " << cm->name << "\n";
    else
      std::cout << file << ": no countermodel in the sweep\n";
  }
  return cm ? 0 : 1;
}

int run_corpus(const Options& opt, const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".mseq") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no .mseq files in " + dir);

  // One task per file; results merged back in input order so the report is
  // deterministic regardless of scheduling.
  CalculusVariant v = variant_of(opt);
  SearchLimits lim = limits_of(opt);
  unsigned threads = std::min<unsigned>(thread_cap(), files.size());
  std::vector<CorpusEntry> entries(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
      CorpusReport one = prove_corpus(v, {files[i]}, lim);
      entries[i] = one.entries.front();
    }
  };
  std::vector<std::future<void>> pool;
  for (unsigned t = 1; t < threads; ++t) pool.push_back(std::async(std::launch::async, worker));
  worker();
  for (auto& f : pool) f.get();

  CorpusReport report;
  report.entries = std::move(entries);
  if (opt.as_json) {
    json j = header_json(opt, "corpus");
    j["dir"] = dir;
    j["all_ok"] = report.all_ok();
    json items = json::array();
    for (const auto& e : report.entries)
      items.push_back({{"file", e.file},
                       {"expect", e.expect},
                       {"outcome", outcome_name(e.outcome)},
                       {"ok", e.ok},
                       {"error", e.error}});
    j["entries"] = items;
    std::cout << j.dump(2) << "\n";
  } else {
    print_header(opt, "corpus");
    std::cout << report.render();
  }
  return report.all_ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CMALL multisequent prover and algebraic semantics workbench"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--variant", opt.variant, "Calculus variant")
      ->check(CLI::IsMember({"cmall", "naive"}))
      ->capture_default_str();
  app.add_option("--max-depth", opt.max_depth, "Search depth cap")->capture_default_str();
  app.add_option("--max-structural", opt.max_structural,
                 "Consecutive structural-rule cap per branch")
      ->capture_default_str();
  app.add_option("--universe", opt.universe_file, "Universe configuration file");
  app.add_option("--out", opt.out_file, "Output path for proofs");
  app.add_flag("--json", opt.as_json, "Emit a JSON report");

  std::string file, dir;
  CLI::App* prove_cmd = app.add_subcommand("prove", "Search for a proof of a multisequent");
  prove_cmd->add_option("file", file, "Multisequent file")->required();
  CLI::App* check_cmd = app.add_subcommand("check", "Verify a proof file");
  check_cmd->add_option("file", file, "Proof file")->required();
  CLI::App* elim_cmd = app.add_subcommand("eliminate", "Rewrite a proof to cut-free form");
  elim_cmd->add_option("file", file, "Proof file")->required();
  CLI::App* val_cmd = app.add_subcommand("validate", "Check validity in a phase structure");
  val_cmd->add_option("file", file, "Multisequent file")->required();
  CLI::App* cm_cmd = app.add_subcommand("countermodel", "Sweep for a refuting phase structure");
  cm_cmd->add_option("file", file, "Multisequent file")->required();
  CLI::App* corpus_cmd = app.add_subcommand("corpus", "Prove every .mseq file in a directory");
  corpus_cmd->add_option("dir", dir, "Corpus directory")->required();
  // global flags may follow the subcommand name
  for (CLI::App* sub : app.get_subcommands(nullptr)) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (prove_cmd->parsed()) return run_prove(opt, file);
    if (check_cmd->parsed()) return run_check(opt, file);
    if (elim_cmd->parsed()) return run_eliminate(opt, file);
    if (val_cmd->parsed()) {
      if (opt.universe_file.empty())
        throw CLI::RequiredError("validate needs --universe");
      return run_validate(opt, file);
    }
    if (cm_cmd->parsed()) return run_countermodel(opt, file);
    if (corpus_cmd->parsed()) return run_corpus(opt, dir);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << " at " << e.position << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
