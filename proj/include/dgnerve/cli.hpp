#pragma once
// Command-line front end: the flat key-value input document, command
// dispatch, machine-readable reports, the independent alternating Čech
// oracle and the self-verification suite.

#include "dgnerve/defo.hpp"

#include <map>
#include <string>

namespace dgn {

struct input_error : std::runtime_error {
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InputDocument {
    Scheme scheme;
    std::string scheme_echo;
    SheafDescription sheaf;
    std::string sheaf_echo;
    std::shared_ptr<const ArtinLocalRing> artin;
    std::string artin_echo;

    std::string command;
    std::string model = "endQ";  // endQ | CL | Ch
    DegreeBox box;
    bool box_given = false;
    int level_cap = -1;
    int polycap = 3;
    int depth_cap = 16;
    unsigned long seed = 1;
    int threads = 1;
    bool strict = false;

    std::string output_path;
    std::string format = "text";
};

// Parses the document text; throws input_error with line information.
InputDocument parse_input(const std::string& text);

struct RunResult {
    int exit_code = 0;  // 0 ok, 1 input error, 2 inconclusive (strict), 3 internal
    std::string report;
};

RunResult run(const InputDocument& doc);

// ---- the independent oracle ----
// Alternating Čech cohomology of the cover, assembled directly from chart
// monoid membership; shares no code with the Hom/DGLA machinery.

// H^k(X, F) for line-bundle sums and chart-origin skyscrapers
ExtResult cech_oracle_cohomology(const SheafDescription& sheaf, const Scheme& scheme, const DegreeBox& box);
// Ext^k(F, F): for locally free sums via the Hom bundle, for single-chart
// principal skyscrapers via direct elimination on the Koszul End complex
ExtResult cech_oracle_ext(const SheafDescription& sheaf, const Scheme& scheme, const DegreeBox& box);

// self-verification: named invariant suites with pass/fail counts
struct SelftestOutcome {
    int passed = 0;
    int failed = 0;
    std::string log;
};

SelftestOutcome selftest(unsigned long seed, int level_cap = 2, int polycap = 3);

}  // namespace dgn
