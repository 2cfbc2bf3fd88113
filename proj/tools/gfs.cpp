// gfs: command-line front end.
//
//   gfs barcode    --n --R --k --profile REF:c,delta|file --mode --limit
//   gfs scan       --n --k --profile --csv file
//   gfs verify     --suite generation|values|index|chains|invariance|algebra
//   gfs nonsqueeze --A1 --A2 [--A3] [--max-prime] [--evidence]
//
// Exit codes: 0 ok, 1 verification failure, 2 invalid flags,
// 3 computation error, 4 search bound exceeded.

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gfs/crit.hpp"
#include "gfs/equivar.hpp"
#include "gfs/errors.hpp"
#include "gfs/genfun.hpp"
#include "gfs/squeeze.hpp"
#include "gfs/sympl.hpp"
#include "gfs/verify.hpp"

namespace {

using nlohmann::ordered_json;

constexpr const char* kSchema = "gfs/1";
constexpr int kExitVerify = 1;
constexpr int kExitFlags = 2;
constexpr int kExitCompute = 3;
constexpr int kExitBound = 4;

// Flag-level problems detected after parsing.
struct FlagError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Line-based key=value file; '#' starts a comment.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FlagError("cannot read config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FlagError(path + ":" + std::to_string(lineNo) + ": expected key=value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

// Value of --config in argv (before CLI11 parsing, so that its entries can
// become option defaults that explicit flags override).
std::optional<std::string> config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return std::nullopt;
}

// Real number with an optional "pi" factor: "-0.9pi", "pi", "2.5".
double parse_real_pi(std::string s) {
  s = trim(s);
  double factor = 1.0;
  if (s.size() >= 2 && s.substr(s.size() - 2) == "pi") {
    factor = std::numbers::pi;
    s = trim(s.substr(0, s.size() - 2));
    if (s.empty() || s == "+") return factor;
    if (s == "-") return -factor;
    if (s.back() == '*') s.pop_back();
  }
  size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v * factor;
}

gfs::RadialProfile parse_profile(const std::string& spec) {
  if (spec.rfind("REF:", 0) == 0) {
    const auto body = spec.substr(4);
    const auto comma = body.find(',');
    if (comma == std::string::npos) throw FlagError("--profile REF:c,delta expects two numbers");
    double c = 0.0, delta = 0.0;
    try {
      c = parse_real_pi(body.substr(0, comma));
      delta = parse_real_pi(body.substr(comma + 1));
    } catch (const std::exception&) {
      throw FlagError("cannot parse --profile '" + spec + "'");
    }
    try {
      return gfs::RadialProfile::ref(c, delta);
    } catch (const gfs::Error& e) {
      throw FlagError(e.what());
    }
  }
  std::ifstream in(spec);
  if (!in) throw FlagError("profile file '" + spec + "' not readable");
  try {
    return gfs::RadialProfile::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw FlagError(std::string("profile file: ") + e.what());
  }
}

void validate_k(int k) {
  if (k == 1) return;
  if (k < 1) throw FlagError("--k must be >= 1");
  if (k % 2 == 0) throw FlagError("--k " + std::to_string(k) + " is even (odd prime or 1 required)");
  if (!gfs::is_prime(k)) throw FlagError("--k " + std::to_string(k) + " is not prime");
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p);
  if (!out) throw FlagError("cannot write '" + p.string() + "'");
  out << content;
}

struct Globals {
  int workers = 1;
  std::string outDir = ".";
  std::uint64_t seed = 20240531;
};

// ------------------------------------------------------------ barcode

struct BarcodeArgs {
  int n = 1;
  double R = 1.0;
  int k = 5;
  std::string profile;
  std::string mode;
  bool limit = false;
  bool allDegrees = false;
  int plainShells = 4;
  std::string prefix = "barcode";
  bool noFiles = false;
};

int cmd_barcode(const BarcodeArgs& a, const Globals& g) {
  validate_k(a.k);
  if (a.n < 1) throw FlagError("--n must be >= 1");
  if (!(a.R > 0.0)) throw FlagError("--R must be positive");
  const std::string modeName = a.mode.empty() ? (a.k == 1 ? "plain" : "equivariant") : a.mode;
  gfs::HomologyMode mode;
  try {
    mode = gfs::homology_mode_from_string(modeName);
  } catch (const gfs::Error& e) {
    throw FlagError(e.what());
  }
  if (!a.limit && a.profile.empty()) throw FlagError("--profile is required without --limit");

  gfs::FilteredComplex cx;
  ordered_json params;
  params["n"] = a.n;
  params["R"] = a.R;
  params["k"] = a.k;
  params["mode"] = modeName;
  params["limit"] = a.limit;
  if (a.limit) {
    cx = gfs::limit_complex(a.n, a.R, a.k, a.plainShells);
    if (a.k == 1) params["plainShells"] = a.plainShells;
  } else {
    const auto rho = parse_profile(a.profile);
    gfs::Ambient amb;
    amb.n = a.n;
    amb.R = a.R;
    cx = gfs::ball_complex(amb, rho, a.k);
    params["profile"] = a.profile;
  }
  params["view"] = a.allDegrees ? "all" : "figure";
  gfs::Barcode bc = gfs::barcode(cx, mode);
  if (!a.allDegrees) bc = bc.figure_view(a.n);

  ordered_json j;
  j["schema"] = kSchema;
  j["command"] = "barcode";
  j["params"] = params;
  j["barcode"] = bc.to_json();
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!a.noFiles) {
    std::filesystem::create_directories(g.outDir);
    write_file(std::filesystem::path(g.outDir) / (a.prefix + ".json"), text);
    std::ostringstream tsv;
    gfs::write_tsv(tsv, bc);
    write_file(std::filesystem::path(g.outDir) / (a.prefix + ".tsv"), tsv.str());
  }
  return 0;
}

// ------------------------------------------------------------ scan

struct ScanArgs {
  int n = 1;
  double R = 1.0;
  int k = 3;
  std::string profile = "REF:-0.9pi,0.1";
  std::string csv;
};

int cmd_scan(const ScanArgs& a, const Globals& g) {
  if (a.k < 1 || a.k % 2 == 0) throw FlagError("--k must be odd");
  if (a.n < 1) throw FlagError("--n must be >= 1");
  if (!(a.R > 0.0)) throw FlagError("--R must be positive");
  const auto rho = parse_profile(a.profile);
  gfs::Ambient amb;
  amb.n = a.n;
  amb.R = a.R;
  const auto F = gfs::gf_broken_geodesic(amb, rho);
  const auto found = gfs::sharp_scan(amb, rho, F, a.k, {}, g.workers);
  std::ostringstream csv;
  gfs::export_csv(csv, found, a.k, F->quadIndex(), a.n);
  if (!a.csv.empty()) {
    const std::filesystem::path p = std::filesystem::path(g.outDir) / a.csv;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    write_file(p, csv.str());
  }
  ordered_json j;
  j["schema"] = kSchema;
  j["command"] = "scan";
  j["params"] = {{"n", a.n}, {"R", a.R}, {"k", a.k}, {"profile", a.profile}};
  j["iota"] = F->quadIndex();
  j["manifolds"] = ordered_json::array();
  for (const auto& m : found) {
    ordered_json e;
    e["kind"] = gfs::to_string(m.kind);
    e["l"] = m.l;
    e["value"] = m.value;
    e["index"] = m.index;
    e["nullity"] = m.nullity;
    e["maslov"] = gfs::maslov(m.index, a.k, F->quadIndex(), a.n);
    e["orbit"] = gfs::to_string(m.zkOrbit);
    j["manifolds"].push_back(e);
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

// ------------------------------------------------------------ verify

int cmd_verify(const std::string& suite, const Globals& g) {
  if (!gfs::is_suite(suite)) throw FlagError("unknown suite '" + suite + "'");
  gfs::SuiteOptions opt;
  opt.workers = g.workers;
  opt.seed = g.seed;
  const auto results = gfs::run_suite(suite, opt);
  int passed = 0;
  double worst = 0.0;
  for (const auto& r : results) {
    passed += r.passed;
    worst = std::max(worst, r.residual);
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (r.tolerance > 0.0) std::cout << "  residual=" << r.residual << " tol=" << r.tolerance;
    if (!r.detail.empty()) std::cout << "  [" << r.detail << "]";
    std::cout << "\n";
  }
  std::cout << "suite " << suite << ": " << passed << "/" << results.size() << " passed, max residual " << worst
            << "\n";
  return passed == static_cast<int>(results.size()) ? 0 : kExitVerify;
}

// ------------------------------------------------------------ nonsqueeze

struct SqueezeArgs {
  double A1 = 0.0, A2 = 0.0;
  std::optional<double> A3;
  int maxPrime = 10000;
  bool evidence = false;
  int n = 1;
};

int cmd_nonsqueeze(const SqueezeArgs& a) {
  gfs::SqueezeQuery q;
  q.A1 = a.A1;
  q.A2 = a.A2;
  q.A3 = a.A3;
  q.maxPrime = a.maxPrime;
  if (a.n < 1) throw FlagError("--n must be >= 1");
  try {
    q.validate();
  } catch (const gfs::InvalidArgument& e) {
    throw FlagError(e.what());
  }
  const auto cert = gfs::find_obstruction(q);
  std::optional<gfs::EvidenceReport> rep;
  if (a.evidence && cert.kind != gfs::CertKind::None) rep = gfs::evidence(cert, a.n);
  ordered_json j;
  j["schema"] = kSchema;
  j["command"] = "nonsqueeze";
  const auto body = gfs::certificate_json(cert, a.n, rep ? &*rep : nullptr);
  for (const auto& [key, value] : body.items()) j[key] = value;
  if (cert.kind != gfs::CertKind::None) j["sound"] = gfs::validate_certificate(cert).empty();
  std::cout << j.dump(2) << "\n";
  return 0;
}

// Applies config entries as option defaults of the app or of the selected
// subcommand; unknown keys are flag errors.
void apply_config(CLI::App& app, CLI::App* sub, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    CLI::Option* opt = sub ? sub->get_option_no_throw("--" + key) : nullptr;
    if (!opt) opt = app.get_option_no_throw("--" + key);
    if (!opt || key == "config") throw FlagError("unknown config key '" + key + "'");
    opt->default_val(value);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivariant generating-function homology: barcodes, critical sets, non-squeezing certificates"};
  app.require_subcommand(1);
  Globals g;
  std::string configFile;
  app.add_option("--workers", g.workers, "worker threads (GFS_WORKERS overrides)");
  app.add_option("--out", g.outDir, "output directory");
  app.add_option("--seed", g.seed, "seed for randomized sampling");
  app.add_option("--config", configFile, "key=value config file (flags take precedence)");

  BarcodeArgs ba;
  auto* bcmd = app.add_subcommand("barcode", "barcode JSON + TSV step plot of a ball");
  bcmd->add_option("--n", ba.n, "half dimension");
  bcmd->add_option("--R", ba.R, "ball radius");
  bcmd->add_option("--k", ba.k, "group order (odd prime, or 1 for plain mode)");
  bcmd->add_option("--profile", ba.profile, "REF:c,delta (c may end in pi) or a profile JSON file");
  bcmd->add_option("--mode", ba.mode, "equivariant | plain");
  bcmd->add_flag("--limit", ba.limit, "idealized j -> infinity barcode");
  bcmd->add_flag("--all-degrees", ba.allDegrees, "emit every degree, not only multiples of 2n");
  bcmd->add_option("--plain-shells", ba.plainShells, "shell count of the plain limit model");
  bcmd->add_option("--prefix", ba.prefix, "output file stem");
  bcmd->add_flag("--no-files", ba.noFiles, "print only");

  ScanArgs sa;
  auto* scmd = app.add_subcommand("scan", "critical manifolds of F^#k with CSV export");
  scmd->add_option("--n", sa.n, "half dimension");
  scmd->add_option("--R", sa.R, "ball radius");
  scmd->add_option("--k", sa.k, "odd k");
  scmd->add_option("--profile", sa.profile, "REF:c,delta or a profile JSON file");
  scmd->add_option("--csv", sa.csv, "CSV file (relative to --out)");

  std::string suite;
  auto* vcmd = app.add_subcommand("verify", "run a property suite");
  vcmd->add_option("--suite", suite, "generation | values | index | chains | invariance | algebra")->required();

  SqueezeArgs qa;
  double a3 = 0.0;
  auto* qcmd = app.add_subcommand("nonsqueeze", "non-squeezing certificate");
  qcmd->add_option("--A1", qa.A1, "pi R1^2 (domain)")->required();
  qcmd->add_option("--A2", qa.A2, "pi R2^2 (target)")->required();
  auto* a3opt = qcmd->add_option("--A3", a3, "pi R3^2 (room)");
  qcmd->add_option("--max-prime", qa.maxPrime, "search bound on k");
  qcmd->add_flag("--evidence", qa.evidence, "embed barcode evidence");
  qcmd->add_option("--n", qa.n, "half dimension for the evidence");

  try {
    if (const auto path = config_path(argc, argv)) {
      CLI::App* sub = nullptr;
      for (int i = 1; i < argc && !sub; ++i)
        for (auto* s : {bcmd, scmd, vcmd, qcmd})
          if (s->get_name() == argv[i]) sub = s;
      apply_config(app, sub, read_config(*path));
    }
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitFlags;
  } catch (const FlagError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFlags;
  }

  try {
    if (const char* env = std::getenv("GFS_WORKERS")) {
      try {
        size_t used = 0;
        g.workers = std::stoi(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument(env);
      } catch (const std::exception&) {
        throw FlagError(std::string("GFS_WORKERS='") + env + "' is not an integer");
      }
    }
    if (g.workers < 1) throw FlagError("workers must be >= 1");
    if (a3opt->count() > 0 || !a3opt->get_default_str().empty()) qa.A3 = a3;

    if (bcmd->parsed()) return cmd_barcode(ba, g);
    if (scmd->parsed()) return cmd_scan(sa, g);
    if (vcmd->parsed()) return cmd_verify(suite, g);
    if (qcmd->parsed()) return cmd_nonsqueeze(qa);
  } catch (const FlagError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFlags;
  } catch (const gfs::SearchBoundExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBound;
  } catch (const gfs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCompute;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCompute;
  }
  return kExitFlags;
}
