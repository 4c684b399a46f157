#include "rankpipe/window.hpp"

#include <string>

#include "rankpipe/errors.hpp"

namespace rankpipe {

WindowPlan plan_windows(int n, int w, int s) {
    if (n <= 0 || w <= 0 || s <= 0) {
        throw ConfigError("window plan needs positive candidate count, window length, and step; got n=" +
                          std::to_string(n) + " w=" + std::to_string(w) + " s=" + std::to_string(s));
    }
    if (s > w) {
        throw ConfigError("window step " + std::to_string(s) + " exceeds window length " +
                          std::to_string(w) + "; windows would skip positions");
    }

    WindowPlan plan;
    if (n <= w) {
        plan.windows.push_back({1, n});
        return plan;
    }
    int end = n;
    while (true) {
        const int start = end - w + 1;
        if (start <= 1) {
            plan.windows.push_back({1, w});
            break;
        }
        plan.windows.push_back({start, end});
        end -= s;
    }
    return plan;
}

} // namespace rankpipe
