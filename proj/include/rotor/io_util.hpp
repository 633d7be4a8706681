#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rotor {

// 17 significant digits: enough to round-trip any double exactly.
inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a(s.data(), s.size(), h);
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// CSV sink that tracks byte count and a running content hash, so the manifest
// can list every output without re-reading it.  '.' decimal separator and 17
// significant digits come from fmt_double.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& header) : path_(path), os_(path) {
        if (!os_) throw std::runtime_error("cannot open output file: " + path);
        write_line(header);
    }

    void write_line(const std::string& line) {
        os_ << line << '\n';
        hash_ = fnv1a(line.data(), line.size(), hash_);
        const char nl = '\n';
        hash_ = fnv1a(&nl, 1, hash_);
        bytes_ += line.size() + 1;
    }

    void row(const std::vector<std::string>& cells) {
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) line += ',';
            line += cells[i];
        }
        write_line(line);
    }

    const std::string& path() const { return path_; }
    std::uint64_t content_hash() const { return hash_; }
    std::size_t bytes() const { return bytes_; }

private:
    std::string path_;
    std::ofstream os_;
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
    std::size_t bytes_ = 0;
};

inline std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open file: " + path);
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

// Run f(i) for i in [0, n) on up to `threads` workers over contiguous blocks.
// Callers write results into per-index slots, so the outcome is independent
// of the thread count.
template <typename F>
void parallel_for(long n, int threads, F&& f) {
    if (threads <= 1 || n < 2) {
        for (long i = 0; i < n; ++i) f(i);
        return;
    }
    int workers = static_cast<int>(std::min<long>(threads, n));
    std::vector<std::thread> pool;
    long chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        long lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &f] {
            for (long i = lo; i < hi; ++i) f(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace rotor
