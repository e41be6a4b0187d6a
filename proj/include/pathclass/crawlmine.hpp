#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pathclass/metrics.hpp"
#include "pathclass/models.hpp"

namespace pathclass {

struct CrawlRecord {
    std::string target_uri;
    std::string payload;  // record block decoded as Latin-1 (bytes as chars)
};

// Streams WARC 1.0/1.1 records from a plain or per-record-gzip stream.
// next() yields response records only; malformed records are counted and
// skipped. An unreadable stream header is fatal.
class WarcReader {
public:
    explicit WarcReader(std::istream& in);
    ~WarcReader();

    std::optional<CrawlRecord> next();

    size_t records_seen() const;
    size_t responses_seen() const;
    size_t skipped() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct MinedPaths {
    std::set<std::string> windows;
    std::set<std::string> linux_paths;
};

// Applies the Windows and Linux file-path patterns to the raw text
// (case-insensitively unless strict_case) and deduplicates the full-path
// captures.
MinedPaths extract_paths(const std::string& text, bool strict_case = false);

// Drops Windows paths containing the literal ":/" escape artifact and
// keeps only Linux paths starting with /usr/, /home, /etc, /tmp or /var.
MinedPaths filter_paths(const MinedPaths& mined);

void merge_mined(MinedPaths& into, const MinedPaths& from);

// FPR(t) over a benign corpus for each threshold (strictly increasing).
FprCurve evaluate_fpr(const PathScorer& scorer, const std::vector<std::string>& benign_paths,
                      const std::vector<double>& thresholds);

}  // namespace pathclass
