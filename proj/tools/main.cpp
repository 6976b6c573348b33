#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "cantorcf/build.hpp"
#include "cantorcf/verify.hpp"

namespace {

using namespace cantorcf;

constexpr int kExitPass = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw value_error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw value_error("cannot write '" + path + "'");
  out << text;
}

std::vector<unsigned> parse_digit_list(const std::string& csv) {
  std::vector<unsigned> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw value_error("empty entry in digit list");
    Int d = int_from_string(item);
    out.push_back(static_cast<unsigned>(to_ulong_checked(d, "digit")));
  }
  if (out.empty()) throw value_error("digit list is empty");
  return out;
}

void print_summary(std::ostream& os, const build::Certificate& cert) {
  os << "base " << cert.params.pair.b << ", pair (" << cert.params.pair.d1 << ","
     << cert.params.pair.d2 << "), mode " << build::mode_name(cert.params.mode) << ", psi "
     << cert.params.psi_text << "\n";
  os << "m1 = " << cert.m1 << ", N = " << dec(cert.N) << ", u = " << dec(cert.u) << " = "
     << dec(cert.u1) << " * " << dec(cert.u2) << ", q0 = " << dec(cert.q0)
     << ", c1 = " << dec(cert.c1) << "\n";
  for (const auto& s : cert.steps) {
    os << "step " << s.i << ": m = " << short_int(s.m) << ", sigma = " << (s.sigma > 0 ? "+1" : "-1")
       << ", q has " << digit_count(s.q, 10) << " decimal digits ("
       << mpz_sizeinbase(s.q.get_mpz_t(), 2) << " bits)\n";
  }
  if (cert.status == build::Status::Complete) {
    os << "status: complete (" << cert.steps.size() << " steps)\n";
  } else {
    os << "status: budget-exhausted at depth " << cert.exhausted_at << " ("
       << cert.steps.size() << " steps kept)\n";
  }
}

struct ConstructArgs {
  unsigned base = 3;
  std::string digits_csv;
  std::string pair_csv;
  std::string mode = "relaxed";
  std::string psi = "1";
  std::string epsilon = "1";
  unsigned long depth = 3;
  unsigned long max_bits = 1'000'000;
  std::string out_path;
};

int cmd_construct(const ConstructArgs& a) {
  std::vector<unsigned> D = parse_digit_list(a.digits_csv);
  std::optional<std::pair<unsigned, unsigned>> override_pair;
  if (!a.pair_csv.empty()) {
    std::vector<unsigned> pr = parse_digit_list(a.pair_csv);
    if (pr.size() != 2) throw value_error("--pair needs exactly two digits");
    override_pair = {pr[0], pr[1]};
  }
  build::ConstructionParams params(build::choose_pair(a.base, D, override_pair));
  params.mode = build::mode_from_name(a.mode);
  params.psi_text = a.psi;
  params.psi_expr = psi::parse_psi(a.psi);
  params.epsilon = rat_from_string(a.epsilon);
  params.max_depth = a.depth;
  params.max_bits = a.max_bits;
  params.validate();

  build::Certificate cert = build::run(params);
  std::string json = build::serialize_certificate(cert);
  if (a.out_path.empty()) {
    print_summary(std::cerr, cert);
    std::cout << json;
  } else {
    write_file(a.out_path, json);
    print_summary(std::cout, cert);
    std::cout << "certificate written to " << a.out_path << "\n";
  }
  return cert.status == build::Status::Complete ? kExitPass : kExitBudget;
}

const std::vector<std::string> kCheckNames = {
    "initial",    "structure",  "identity", "determinant", "convergent-chain",
    "membership", "gap-bounds", "growth",   "theorem-bounds"};

int cmd_verify(const std::string& path, const std::string& checks_csv,
               std::size_t digit_budget, bool as_json) {
  verify::VerifyOptions opt;
  opt.digit_budget = digit_budget;
  if (!checks_csv.empty()) {
    std::stringstream ss(checks_csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (std::find(kCheckNames.begin(), kCheckNames.end(), item) == kCheckNames.end())
        throw value_error("unknown check '" + item + "'");
      opt.only.push_back(item);
    }
  }
  build::Certificate cert = build::parse_certificate(read_file(path));
  verify::VerifyResult res = verify::verify_all(cert, opt);
  if (as_json)
    std::cout << verify::report_json(res);
  else
    std::cout << verify::render_report(res);
  return res.overall ? kExitPass : kExitVerifyFail;
}

int cmd_expand(const std::string& path, unsigned long count) {
  build::Certificate cert = build::parse_certificate(read_file(path));
  const build::ConstructionStep& last = cert.steps.back();
  Int guarantee = cert.v.length() + last.N;
  unsigned long take = count;
  if (guarantee < Int(count)) {
    take = to_ulong_checked(guarantee, "guaranteed digit count");
    std::cerr << "note: only " << take
              << " digits are certified (m1 + N_k); truncating the request for " << count
              << "\n";
  }
  std::vector<unsigned> vd = words::expand_digits(cert.v, take);
  std::vector<unsigned> wd =
      words::expand_digits(last.word, take > vd.size() ? take - vd.size() : 0);
  std::vector<unsigned> digits;
  digits.reserve(take);
  for (unsigned long j = 0; j < take; ++j)
    digits.push_back(j < vd.size() ? vd[j] : wd[j - vd.size()]);
  std::cout << words::digits_to_string(digits) << "\n";
  return kExitPass;
}

int cmd_cf(const std::string& cert_path, const std::string& p_str, const std::string& q_str,
           long index) {
  Int p, q;
  if (!p_str.empty() || !q_str.empty()) {
    if (p_str.empty() || q_str.empty()) throw value_error("--p and --q go together");
    p = int_from_string(p_str);
    q = int_from_string(q_str);
  } else if (!cert_path.empty()) {
    build::Certificate cert = build::parse_certificate(read_file(cert_path));
    std::size_t i = index <= 0 ? cert.steps.size() : static_cast<std::size_t>(index);
    if (i < 1 || i > cert.steps.size())
      throw value_error("--index out of range (certificate has " +
                        std::to_string(cert.steps.size()) + " steps)");
    p = cert.steps[i - 1].p;
    q = cert.steps[i - 1].q;
  } else {
    throw value_error("pass either a certificate or --p/--q");
  }
  if (q < 1 || p < 0 || p >= q) throw value_error("expected 0 <= p < q");
  if (gcd(p, q) != 1) throw value_error("p/q must be in lowest terms");

  verify::CfData cf = verify::euclid_convergents(p, q);
  std::cout << "[";
  for (std::size_t j = 0; j < cf.quotients.size(); ++j) {
    if (j == 1)
      std::cout << "; ";
    else if (j > 1)
      std::cout << ", ";
    std::cout << short_int(cf.quotients[j]);
  }
  std::cout << "]\n";
  for (const auto& [cp, cq] : cf.convergents)
    std::cout << short_int(cp) << "/" << short_int(cq) << "\n";
  return kExitPass;
}

int cmd_demo(const std::string& only, bool as_json) {
  if (!only.empty() && only != "0,1" && only != "0,2")
    throw value_error("--only accepts 0,1 or 0,2");
  struct DemoRun {
    std::string key;
    std::string title;
    build::ConstructionParams params;
  };
  std::vector<DemoRun> runs;
  {
    build::ConstructionParams a(words::DigitPair(3, 0, 1, {0, 1}));
    a.mode = build::Mode::Relaxed;
    a.max_depth = 3;
    a.psi_expr = psi::parse_psi(a.psi_text);
    runs.push_back({"0,1", "ternary digits {0,1}, relaxed schedule, depth 3", a});
  }
  {
    build::ConstructionParams b(words::DigitPair(3, 0, 2, {0, 2}));
    b.mode = build::Mode::Strict;
    b.max_depth = 2;
    b.psi_expr = psi::parse_psi(b.psi_text);
    runs.push_back({"0,2", "ternary middle-thirds digits {0,2}, strict schedule, depth 2", b});
  }

  bool all_pass = true;
  bool first = true;
  if (as_json) std::cout << "{\n \"runs\": [\n";
  for (const DemoRun& r : runs) {
    if (!only.empty() && only != r.key) continue;
    build::Certificate cert = build::run(r.params);
    verify::VerifyResult res = verify::verify_all(cert, {});
    all_pass = all_pass && res.overall && cert.status == build::Status::Complete;
    if (as_json) {
      if (!first) std::cout << ",\n";
      first = false;
      std::cout << " {\"name\": \"" << r.key << "\", \"report\": " << verify::report_json(res)
                << " }";
      continue;
    }
    std::cout << "=== " << r.title << " ===\n";
    print_summary(std::cout, cert);
    std::cout << "\nfirst digits of the limit: 0."
              << words::digits_to_string(words::expand_digits(cert.v, cert.m1))
              << words::digits_to_string(words::expand_digits(cert.steps.back().word, 16))
              << "...\n";
    std::cout << "Each step raises the previous repeating word to a power and flips its "
                 "final digit. That makes every certified p/q a convergent of the limit, "
                 "keeps the limit inside the digit set, and pins the approximation error "
                 "between the two bounds checked below.\n\n";
    std::cout << verify::render_report(res) << "\n";
  }
  if (as_json) std::cout << "\n ]\n}\n";
  return all_pass ? kExitPass : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continued-fraction constructions inside missing-digit sets"};
  app.require_subcommand(1);

  ConstructArgs ca;
  CLI::App* construct = app.add_subcommand(
      "construct", "build a certificate for a digit set and gap function");
  construct->add_option("-b,--base", ca.base, "number base (3..36)")->required();
  construct->add_option("-d,--digits", ca.digits_csv, "allowed digits, comma separated")
      ->required();
  construct->add_option("--pair", ca.pair_csv, "working digit pair d1,d2 (default: chosen)");
  construct->add_option("--mode", ca.mode, "strict or relaxed (default relaxed)");
  construct->add_option("--psi", ca.psi, "gap function of q (default 1)");
  construct->add_option("--epsilon", ca.epsilon, "lower-bound slack (default 1)");
  construct->add_option("--depth", ca.depth, "number of steps to attempt (default 3)");
  construct->add_option("--max-bits", ca.max_bits, "bit budget per denominator (default 1e6)");
  construct->add_option("-o,--out", ca.out_path, "certificate file (default: stdout)");

  std::string v_path, v_checks;
  std::size_t v_budget = 100'000;
  bool v_json = false;
  CLI::App* verify_cmd = app.add_subcommand("verify", "re-check a certificate from scratch");
  verify_cmd->add_option("certificate", v_path, "certificate JSON file")->required();
  verify_cmd->add_option("--checks", v_checks, "comma separated subset of checks to run");
  verify_cmd->add_option("--digit-budget", v_budget, "positional membership digit budget");
  verify_cmd->add_flag("--json", v_json, "machine-readable report");

  std::string e_path;
  unsigned long e_count = 64;
  CLI::App* expand_cmd =
      app.add_subcommand("expand", "print leading digits of the deepest fraction");
  expand_cmd->add_option("certificate", e_path, "certificate JSON file")->required();
  expand_cmd->add_option("-n,--count", e_count, "digits to print (default 64)");

  std::string cf_path, cf_p, cf_q;
  long cf_index = 0;
  CLI::App* cf_cmd = app.add_subcommand("cf", "canonical continued fraction and convergents");
  cf_cmd->add_option("certificate", cf_path, "certificate JSON file");
  cf_cmd->add_option("--p", cf_p, "numerator (with --q, instead of a certificate)");
  cf_cmd->add_option("--q", cf_q, "denominator");
  cf_cmd->add_option("--index", cf_index, "step to expand (default: deepest)");

  std::string d_only;
  bool d_json = false;
  CLI::App* demo_cmd = app.add_subcommand("demo", "run and verify two reference constructions");
  demo_cmd->add_option("--only", d_only, "restrict to one run: 0,1 or 0,2");
  demo_cmd->add_flag("--json", d_json, "machine-readable reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*construct) return cmd_construct(ca);
    if (*verify_cmd) return cmd_verify(v_path, v_checks, v_budget, v_json);
    if (*expand_cmd) return cmd_expand(e_path, e_count);
    if (*cf_cmd) return cmd_cf(cf_path, cf_p, cf_q, cf_index);
    if (*demo_cmd) return cmd_demo(d_only, d_json);
  } catch (const budget_error& e) {
    std::cerr << "budget exhausted: " << e.what() << "\n";
    return kExitBudget;
  } catch (const parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const value_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kExitVerifyFail;
  }
  return kExitUsage;
}
