#include "pathclass/crawlmine.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <istream>
#include <regex>

#include "pathclass/error.hpp"

namespace pathclass {

namespace {

constexpr size_t kChunk = 1 << 16;

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    }
    return true;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

struct WarcReader::Impl {
    std::istream& in;
    bool gzip = false;
    z_stream zs{};
    bool zs_open = false;
    bool raw_eof = false;
    std::vector<unsigned char> raw;  // compressed bytes pending inflation
    std::string buf;                 // decoded bytes pending parsing
    size_t pos = 0;                  // parse cursor into buf
    bool first_record = true;
    size_t records_seen = 0, responses_seen = 0, skipped = 0;

    explicit Impl(std::istream& stream) : in(stream) {
        if (!fill() || buf_size() == 0) throw FormatError("empty or unreadable WARC stream");
    }

    ~Impl() {
        if (zs_open) inflateEnd(&zs);
    }

    size_t buf_size() const { return buf.size() - pos; }

    void compact() {
        if (pos > (1 << 20)) {
            buf.erase(0, pos);
            pos = 0;
        }
    }

    // Pulls one chunk from the stream into buf, inflating if the stream
    // opened with a gzip magic. Returns false when fully drained.
    bool fill() {
        if (raw_eof && raw.empty()) return false;
        if (!raw_eof) {
            const size_t old = raw.size();
            raw.resize(old + kChunk);
            in.read(reinterpret_cast<char*>(raw.data() + old),
                    static_cast<std::streamsize>(kChunk));
            raw.resize(old + static_cast<size_t>(in.gcount()));
            if (in.gcount() == 0) raw_eof = true;
        }
        if (buf.empty() && pos == 0 && !gzip && raw.size() >= 2 && raw[0] == 0x1f &&
            raw[1] == 0x8b) {
            gzip = true;
            zs = {};
            if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
                throw Error("zlib initialization failed");
            zs_open = true;
        }
        if (!gzip) {
            buf.append(reinterpret_cast<const char*>(raw.data()), raw.size());
            raw.clear();
            return true;
        }

        // Inflate what we have; per-record members are concatenated, so a
        // finished member resets the inflater and decoding continues.
        zs.next_in = raw.data();
        zs.avail_in = static_cast<uInt>(raw.size());
        unsigned char out[kChunk];
        while (zs.avail_in > 0) {
            zs.next_out = out;
            zs.avail_out = kChunk;
            const int rc = inflate(&zs, Z_NO_FLUSH);
            buf.append(reinterpret_cast<const char*>(out), kChunk - zs.avail_out);
            if (rc == Z_STREAM_END) {
                if (inflateReset(&zs) != Z_OK) throw Error("zlib reset failed");
                continue;
            }
            if (rc == Z_BUF_ERROR && zs.avail_in == 0) break;  // need more input
            if (rc != Z_OK) {
                // Corrupt compressed tail: everything decoded so far is still
                // parseable; the remainder is dropped.
                raw.clear();
                raw_eof = true;
                return true;
            }
        }
        raw.erase(raw.begin(), raw.end() - zs.avail_in);
        return true;
    }

    bool ensure(size_t n) {
        while (buf_size() < n) {
            if (!fill() && buf_size() < n) return false;
        }
        return true;
    }

    // Finds the next header-block terminator, growing the buffer as needed.
    // Returns the offset (relative to pos) just past the terminator, or npos.
    size_t find_header_end() {
        size_t scanned = 0;
        for (;;) {
            const size_t hit = buf.find("\r\n\r\n", pos + scanned);
            if (hit != std::string::npos) return hit - pos + 4;
            const size_t lf = buf.find("\n\n", pos + scanned);
            if (lf != std::string::npos) return lf - pos + 2;
            scanned = buf_size() > 4 ? buf_size() - 4 : 0;
            if (!fill()) return std::string::npos;
        }
    }

    void skip_blank_lines() {
        for (;;) {
            if (buf_size() == 0 && !fill()) return;
            if (buf_size() >= 2 && buf[pos] == '\r' && buf[pos + 1] == '\n') {
                pos += 2;
            } else if (buf_size() >= 1 && buf[pos] == '\n') {
                pos += 1;
            } else if (buf_size() == 1 && buf[pos] == '\r') {
                if (!fill()) {
                    pos += 1;
                    return;
                }
            } else {
                return;
            }
        }
    }

    // Skips past the current (malformed) record by searching for the next
    // version line.
    bool resync() {
        ++skipped;
        for (;;) {
            const size_t hit = buf.find("WARC/", pos + 1);
            if (hit != std::string::npos) {
                pos = hit;
                return true;
            }
            if (!fill()) return false;
        }
    }

    std::optional<CrawlRecord> next() {
        for (;;) {
            skip_blank_lines();
            compact();
            if (buf_size() == 0 && !fill() && buf_size() == 0) return std::nullopt;

            if (buf.compare(pos, 5, "WARC/") != 0) {
                if (first_record) throw FormatError("stream does not begin with a WARC header");
                if (!resync()) return std::nullopt;
                continue;
            }

            const size_t header_len = find_header_end();
            if (header_len == std::string::npos) {
                ++skipped;  // truncated header at end of stream
                return std::nullopt;
            }
            const std::string header = buf.substr(pos, header_len);
            first_record = false;

            // Parse the needed headers.
            std::string type, uri;
            long long content_length = -1;
            size_t line_start = header.find('\n');  // skip the version line
            bool version_ok = header.rfind("WARC/1.", 0) == 0;
            while (version_ok && line_start != std::string::npos &&
                   line_start + 1 < header.size()) {
                const size_t line_end = header.find('\n', line_start + 1);
                std::string_view line(header.data() + line_start + 1,
                                      (line_end == std::string::npos ? header.size() : line_end) -
                                          line_start - 1);
                line = trim(line);
                const size_t colon = line.find(':');
                if (!line.empty() && colon != std::string_view::npos) {
                    const std::string_view name = trim(line.substr(0, colon));
                    const std::string_view value = trim(line.substr(colon + 1));
                    if (iequals(name, "WARC-Type")) {
                        type = std::string(value);
                    } else if (iequals(name, "WARC-Target-URI")) {
                        uri = std::string(value);
                    } else if (iequals(name, "Content-Length")) {
                        try {
                            content_length = std::stoll(std::string(value));
                        } catch (...) {
                            content_length = -1;
                        }
                    }
                }
                line_start = line_end;
            }

            if (!version_ok || content_length < 0) {
                if (!resync()) return std::nullopt;
                continue;
            }

            if (!ensure(header_len + static_cast<size_t>(content_length))) {
                ++skipped;  // truncated payload
                return std::nullopt;
            }
            CrawlRecord record;
            record.target_uri = uri;
            record.payload = buf.substr(pos + header_len, static_cast<size_t>(content_length));
            pos += header_len + static_cast<size_t>(content_length);
            ++records_seen;
            if (iequals(type, "response")) {
                ++responses_seen;
                return record;
            }
        }
    }
};

WarcReader::WarcReader(std::istream& in) : impl_(std::make_unique<Impl>(in)) {}
WarcReader::~WarcReader() = default;
std::optional<CrawlRecord> WarcReader::next() { return impl_->next(); }
size_t WarcReader::records_seen() const { return impl_->records_seen; }
size_t WarcReader::responses_seen() const { return impl_->responses_seen; }
size_t WarcReader::skipped() const { return impl_->skipped; }

namespace {

// The two path patterns, with the original line-wrapping removed.
constexpr char kWindowsPattern[] =
    R"(([a-z]:\\([a-z0-9() ]*\\)*[a-z0-9()]*\.(jpg|jpeg|png|gif|mp4|mov|m4a|m4v|mpg|mpeg|wmv|avi|flv|3gp|3gpp|3g2|3gp2|doc|docx|xls|xlsx|ppt|pptx|pdf)))";
constexpr char kLinuxPattern[] =
    R"((/([a-zA-Z0-9()]*/)*[a-zA-Z0-9()]*\.(jpg|jpeg|png|gif|mp4|mov|m4a|m4v|mpg|mpeg|wmv|avi|flv|3gp|3gpp|3g2|3gp2|doc|docx|xls|xlsx|ppt|pptx|pdf)))";

void collect(const std::string& text, const std::regex& re, std::set<std::string>& out) {
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
         it != std::sregex_iterator(); ++it) {
        out.insert((*it)[1].str());
    }
}

}  // namespace

MinedPaths extract_paths(const std::string& text, bool strict_case) {
    static const std::regex win_icase(kWindowsPattern,
                                      std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    static const std::regex win_strict(kWindowsPattern,
                                       std::regex::ECMAScript | std::regex::optimize);
    static const std::regex linux_icase(kLinuxPattern,
                                        std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    static const std::regex linux_strict(kLinuxPattern,
                                         std::regex::ECMAScript | std::regex::optimize);
    MinedPaths out;
    collect(text, strict_case ? win_strict : win_icase, out.windows);
    collect(text, strict_case ? linux_strict : linux_icase, out.linux_paths);
    return out;
}

MinedPaths filter_paths(const MinedPaths& mined) {
    static const std::string kEscapeArtifact = ":\\u002F";
    static const char* const kLinuxPrefixes[] = {"/usr/", "/home", "/etc", "/tmp", "/var"};

    MinedPaths out;
    for (const auto& p : mined.windows) {
        if (p.find(kEscapeArtifact) == std::string::npos) out.windows.insert(p);
    }
    for (const auto& p : mined.linux_paths) {
        for (const char* prefix : kLinuxPrefixes) {
            if (p.rfind(prefix, 0) == 0) {
                out.linux_paths.insert(p);
                break;
            }
        }
    }
    return out;
}

void merge_mined(MinedPaths& into, const MinedPaths& from) {
    into.windows.insert(from.windows.begin(), from.windows.end());
    into.linux_paths.insert(from.linux_paths.begin(), from.linux_paths.end());
}

FprCurve evaluate_fpr(const PathScorer& scorer, const std::vector<std::string>& benign_paths,
                      const std::vector<double>& thresholds) {
    if (benign_paths.empty()) throw InvalidInput("evaluate_fpr on empty benign corpus");
    std::vector<double> scores;
    scores.reserve(benign_paths.size());
    for (const auto& p : benign_paths) scores.push_back(scorer.score(p));
    return fpr_curve(scores, thresholds);
}

}  // namespace pathclass
