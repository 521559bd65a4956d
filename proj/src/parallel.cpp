#include "dsl/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <string_view>

namespace dsl {

std::size_t workers_from_environment() {
    const char* value = std::getenv("DSL_WORKERS");
    if (value == nullptr) return 1;
    const std::string_view text(value);
    std::size_t workers = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), workers);
    if (ec != std::errc() || ptr != text.data() + text.size() || workers == 0) return 1;
    return workers;
}

}  // namespace dsl
