// Command-line front end: run scenarios, print finality tables, validate files.

#include "xchain/common/format.hpp"
#include "xchain/finality/model.hpp"
#include "xchain/finality/table.hpp"
#include "xchain/harness/report.hpp"
#include "xchain/harness/scenario.hpp"
#include "xchain/harness/world.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>

namespace {

using namespace xchain;

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kInvariant = 2;

std::filesystem::path output_dir(const std::string& flag, const harness::Scenario& sc)
{
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("XCHAIN_OUT_DIR"); env && *env) return env;
    if (!sc.out_dir.empty()) return sc.out_dir;
    return "xchain-out";
}

int report_violations(const std::vector<std::string>& violations, const std::string& prefix = "")
{
    for (const auto& v : violations) std::cerr << "invariant violated: " << prefix << v << '\n';
    return violations.empty() ? kOk : kInvariant;
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, const std::string& out, std::size_t trials)
{
    const auto sc = harness::load_scenario(path);
    const auto dir = output_dir(out, sc);
    if (trials <= 1) {
        harness::World world(sc, seed);
        world.run();
        const auto m = world.report();
        harness::write_artifacts(world, m, dir);
        std::cout << "delivered " << m.delivered << ", dropped " << m.dropped << ", pending " << m.pending
                  << ", ledger " << m.ledger_length << " -> " << dir.string() << '\n';
        return report_violations(m.violations);
    }
    const auto runs = harness::run_trials(sc, seed.value_or(sc.seed), trials);
    harness::write_batch(runs, dir);
    int code = kOk;
    for (const auto& m : runs) {
        if (report_violations(m.violations, "seed " + std::to_string(m.seed) + ": ") != kOk) code = kInvariant;
    }
    std::cout << trials << " trials -> " << dir.string() << '\n';
    return code;
}

void print_row(const std::string& src, const std::string& dst, const finality::TableEntry& e)
{
    std::cout << src << ',' << dst << ',' << fmt9(e.inputs.q) << ',' << fmt9(e.inputs.t_hat) << ','
              << fmt9(e.epsilon) << ',';
    if (e.status == finality::EntryStatus::Ok) {
        std::cout << *e.z << ',' << fmt9(e.advisory_wait);
    } else {
        std::cout << "inf,inf";
    }
    std::cout << ',' << finality::to_string(e.status) << '\n';
}

int cmd_table(std::optional<double> q, std::optional<double> t, std::optional<double> eps, const std::string& path)
{
    std::cout << "source,dest,q,T,epsilon,z,advisory_seconds,status\n";
    if (!path.empty()) {
        const auto sc = harness::load_scenario(path);
        std::map<ChainId, finality::FinalityInputs> stats;
        for (const auto& c : sc.chains) {
            stats[c.spec.id] = finality::FinalityInputs{c.assumed_q.value_or(0.0), c.spec.block_interval};
        }
        const auto table = finality::build_table(stats, sc.policies, 0.0);
        for (const auto& [key, e] : table.entries()) print_row(sc.chain_name(key.first), sc.chain_name(key.second), e);
        return kOk;
    }
    if (!q || !t || !eps) throw harness::ValidationError({"finality-table needs --q, --T and --epsilon, or --scenario"});
    finality::validate(finality::FinalityInputs{*q, *t});
    if (!(*eps > 0.0 && *eps < 1.0)) throw harness::ValidationError({"epsilon must lie in (0, 1)"});
    const auto table = finality::build_table({{0, {*q, *t}}}, {{0, 1, *eps}}, 0.0);
    print_row("*", "*", *table.lookup(0, 1));
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-chain inter-connector simulator"};
    app.require_subcommand(1);

    std::string scenario;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t trials = 1;
    auto* run = app.add_subcommand("run", "Run a scenario and write metrics and audit artifacts");
    run->add_option("--scenario", scenario, "Scenario file")->required();
    auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--out", out, "Output directory (else $XCHAIN_OUT_DIR, the scenario, ./xchain-out)");
    run->add_option("--trials", trials, "Independent runs with seeds seed+i")->check(CLI::PositiveNumber);

    double q = 0.0, t = 0.0, eps = 0.0;
    std::string table_scenario;
    auto* table = app.add_subcommand("finality-table", "Print required confirmations without simulating");
    auto* q_opt = table->add_option("--q", q, "Adversary mining-power fraction");
    auto* t_opt = table->add_option("--T", t, "Mean block interval in seconds");
    auto* e_opt = table->add_option("--epsilon", eps, "Tolerated reversal probability");
    table->add_option("--scenario", table_scenario, "Use chains (assumed_q, block_interval) and policies of a file");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Parse and validate a scenario file");
    validate->add_option("--scenario", validate_path, "Scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (*run) {
            return cmd_run(scenario, *seed_opt ? std::optional<std::uint64_t>(seed) : std::nullopt, out, trials);
        }
        if (*table) {
            auto opt = [](CLI::Option* o, double v) { return *o ? std::optional<double>(v) : std::nullopt; };
            return cmd_table(opt(q_opt, q), opt(t_opt, t), opt(e_opt, eps), table_scenario);
        }
        if (*validate) {
            const auto sc = harness::load_scenario(validate_path);
            auto count = [](std::size_t n, const char* one, const char* many) {
                return std::to_string(n) + ' ' + (n == 1 ? one : many);
            };
            std::cout << validate_path << ": ok (" << count(sc.chains.size(), "chain", "chains") << ", "
                      << count(sc.policies.size(), "policy", "policies") << ", "
                      << count(sc.attacks.size(), "attack", "attacks") << ")\n";
            return kOk;
        }
    } catch (const harness::ValidationError& e) {
        std::cerr << e.what() << '\n';
        return kValidation;
    } catch (const finality::DomainError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kValidation;
    } catch (const chain::AttackConflict& e) {
        std::cerr << "invalid scenario: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvariant;
    }
    return kOk;
}
