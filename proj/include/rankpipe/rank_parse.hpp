#pragma once

#include <string>
#include <vector>

namespace rankpipe {

/// Window-local identifiers in ranked order. Raw parser output may contain
/// duplicates, omissions, or out-of-range values; after repair it is always a
/// permutation of 1..window_length.
struct RankList {
    std::vector<int> local_ids;

    bool operator==(const RankList&) const = default;
};

/// Extracts the last maximal chain of bracketed integers from a reply, where
/// chain elements like "[3]" may be separated by any mix of whitespace,
/// commas, and '>'. Chain-of-thought prose before the ranking is skipped by
/// the last-chain rule. Throws UnparseableReplyError when the reply contains
/// no bracketed integer at all.
RankList parse_rank_list(const std::string& reply, int window_length);

/// Normalizes raw parser output into a permutation of 1..window_length:
/// out-of-range ids are dropped, only the first occurrence of a duplicate is
/// kept, and missing ids are appended in ascending order (original window
/// order). Total and idempotent.
RankList repair_rank_list(const RankList& raw, int window_length);

} // namespace rankpipe
