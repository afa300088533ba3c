// Runs the bundled acceptance criteria with seed 42 and prints one line each.
// Exit status is nonzero iff any criterion fails.

#include <cstdio>
#include <exception>
#include <string>

#include "qloc/acceptance.hpp"
#include "qloc/errors.hpp"

namespace {

std::string failing_verdicts(const qloc::CriterionResult& r) {
  std::string out;
  for (const qloc::Verdict& v : r.verdicts) {
    if (v.pass) continue;
    if (!out.empty()) out += "; ";
    out += v.name + " = " + qloc::Json(v.value).dump() + " (needs " + v.relation + " " + v.tolerance.dump() + ")";
  }
  if (!r.within_budget()) {
    if (!out.empty()) out += "; ";
    out += "runtime " + std::to_string(r.seconds) + " s over budget " + std::to_string(r.budget_seconds) + " s";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string filter = argc > 1 ? argv[1] : "";
  try {
    const qloc::AcceptanceRun run = qloc::run_acceptance(qloc::default_acceptance_dir(), 42, filter);
    for (const qloc::CriterionResult& r : run.results) {
      std::printf("[%s] %2d %-22s %-12s %7.2f s", r.pass() ? "PASS" : "FAIL", r.id, r.name.c_str(),
                  r.group.c_str(), r.seconds);
      if (!r.pass()) std::printf("  %s", failing_verdicts(r).c_str());
      std::printf("\n");
    }
    std::printf("%s\n", run.pass() ? "acceptance: all criteria pass" : "acceptance: some criteria fail");
    return run.pass() ? 0 : 1;
  } catch (const qloc::InputError& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 3;
  }
}
