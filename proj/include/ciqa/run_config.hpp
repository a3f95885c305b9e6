#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ciqa/image.hpp"
#include "ciqa/two_stage.hpp"

namespace ciqa {

struct RunConfig {
    std::uint64_t seed = 1;
    int rounds = 200;
    int repeats = 40;
    int folds = 5;
    int workers = 0;  // 0 = library default / CURVIQA_WORKERS
    BlockPolicy block_policy = BlockPolicy::Flush;
    ts::GridConfig grid;
    std::vector<std::string> classes = {"jp2k", "jpeg", "wn", "gblur"};

    void validate() const;
};

// Plain-text key=value document ('#' starts a comment). Values from the
// file override values already set. Keys: seed, rounds, repeats, folds,
// workers, block_policy, c_grid, gamma_grid, nu, cv_folds, cv_repeats,
// classes.
void apply_config_file(RunConfig& cfg, const std::string& path);

}  // namespace ciqa
