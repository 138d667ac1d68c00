#pragma once

#include "xchain/harness/world.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace xchain::harness {

std::string metrics_csv(const MetricsReport& m);
std::string summary_json(const MetricsReport& m);
std::string transfers_csv(const relay::AuditLog& audit, const Scenario& sc);
std::string ledger_csv(const std::vector<connector::LedgerEntry>& ledger, const Scenario& sc);
std::string flags_csv(const std::vector<FlagEvent>& flags, const Scenario& sc);

// metrics.csv, summary.json, transfers.csv, ledger.csv, flags.csv
void write_artifacts(const World& world, const MetricsReport& m, const std::filesystem::path& dir);

// Independent runs with seeds base_seed + i; results in trial order.
std::vector<MetricsReport> run_trials(const Scenario& sc, std::uint64_t base_seed, std::size_t trials,
                                      std::size_t threads = 0);

std::string trials_csv(const std::vector<MetricsReport>& runs);
std::string batch_summary_json(const std::vector<MetricsReport>& runs);
void write_batch(const std::vector<MetricsReport>& runs, const std::filesystem::path& dir);

} // namespace xchain::harness
