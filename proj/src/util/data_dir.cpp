#include "speedrun/util/data_dir.hpp"

#include <cstdlib>
#include <stdexcept>

namespace speedrun::util {

std::filesystem::path data_dir() {
    if (const char* env = std::getenv("SPEEDRUN_DATA_DIR")) {
        std::filesystem::path p(env);
        if (std::filesystem::is_directory(p)) return p;
        throw std::runtime_error("SPEEDRUN_DATA_DIR is set but is not a directory: " +
                                 std::string(env));
    }
#ifdef SPEEDRUN_SOURCE_DATA_DIR
    {
        std::filesystem::path p(SPEEDRUN_SOURCE_DATA_DIR);
        if (std::filesystem::is_directory(p)) return p;
    }
#endif
    std::filesystem::path p("data");
    if (std::filesystem::is_directory(p)) return p;
    throw std::runtime_error(
        "cannot locate data directory (set SPEEDRUN_DATA_DIR or run from the repo root)");
}

}  // namespace speedrun::util
