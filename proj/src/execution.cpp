#include "uqkit/execution.hpp"

namespace uqkit {

void for_each_index(std::size_t count, Execution exec, const std::function<void(std::size_t)>& body) {
    std::vector<std::exception_ptr> errors(count);
    const auto n = static_cast<long>(count);
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (long i = 0; i < n; ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    } else {
        for (long i = 0; i < n; ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace uqkit
