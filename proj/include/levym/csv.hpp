#pragma once
#include <cstdio>
#include <initializer_list>
#include <string>

#include "levym/errors.hpp"

namespace levym {

// Shortest round-trip decimal form of a double.
inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Deterministic CSV writer: LF endings, doubles as %.17g, no locale effects.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : f_(std::fopen(path.c_str(), "wb")) {
        if (!f_) throw Error("cannot open " + path + " for writing");
    }
    ~CsvWriter() {
        if (f_) std::fclose(f_);
    }
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void raw_line(const std::string& line) {
        std::fputs(line.c_str(), f_);
        std::fputc('\n', f_);
    }
    void row(std::initializer_list<std::string> cells) {
        bool first = true;
        for (const std::string& c : cells) {
            if (!first) std::fputc(',', f_);
            std::fputs(c.c_str(), f_);
            first = false;
        }
        std::fputc('\n', f_);
    }

  private:
    std::FILE* f_;
};

}  // namespace levym
