#pragma once

#include <cstddef>
#include <vector>

namespace lsmrum {

// Prefix merge policy: the newest run of components whose combined size
// stays within `cap` is merged as soon as the run length reaches the
// threshold. Returns the run length (0 if the policy does not fire).
inline std::size_t prefix_merge_run(const std::vector<std::size_t>& sizes_newest_first,
                                    std::size_t cap, std::size_t threshold) {
    std::size_t run = 0, total = 0;
    for (std::size_t sz : sizes_newest_first) {
        if (total + sz > cap) break;
        total += sz;
        ++run;
    }
    return run >= threshold ? run : 0;
}

}  // namespace lsmrum
