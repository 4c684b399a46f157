#pragma once

#include <vector>

namespace rankpipe {

/// A 1-based inclusive position range over the current ordering.
struct Window {
    int start = 1;
    int end = 1;

    int length() const { return end - start + 1; }

    bool operator==(const Window&) const = default;
};

/// The back-to-first window schedule for one pass: the first window ends at
/// position n, each following window's end moves down by the step, and the
/// final window is clamped to start at 1 while keeping the full window
/// length.
struct WindowPlan {
    std::vector<Window> windows;
};

/// Computes the schedule for n candidates with window length w and step s.
/// n <= w yields the single window (1, n); otherwise the plan has
/// ceil((n - w) / s) + 1 windows of length w. Throws ConfigError when the
/// inputs are nonpositive or s > w.
WindowPlan plan_windows(int n, int w, int s);

} // namespace rankpipe
