#ifndef GGLANGEVIN_CLI_HPP
#define GGLANGEVIN_CLI_HPP

#include <optional>
#include <string>

#include "gglangevin/io.hpp"

namespace gg {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitDivergence = 2;
inline constexpr int kExitPartialFailure = 3;

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> sampler;
    std::optional<int> threads;
    bool analytic_only = false;
};

int cmd_toy1d(const Config& cfg, const std::string& out_dir, const CliOverrides& ov = {});
int cmd_train_score(const Config& cfg, const std::string& out_dir, const CliOverrides& ov = {});
int cmd_reconstruct(const Config& cfg, const std::string& out_dir, const CliOverrides& ov = {});
int cmd_bench(const Config& cfg, const std::string& out_dir, const CliOverrides& ov = {});

int cli_main(int argc, char** argv);

}  // namespace gg

#endif
