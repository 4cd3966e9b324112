#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace dlab {

// RFC 4180 writer with deterministic number formatting (%.17g round-trips
// doubles exactly, so reruns produce byte-identical files).
class CsvWriter {
public:
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) buf_ += ',';
            buf_ += quote(cells[i]);
        }
        buf_ += "\r\n";
    }

    static std::string num(double v) {
        char tmp[40];
        std::snprintf(tmp, sizeof(tmp), "%.17g", v);
        return tmp;
    }
    static std::string num(long v) { return std::to_string(v); }
    static std::string num(int v) { return std::to_string(v); }
    static std::string num(std::size_t v) { return std::to_string(v); }

    const std::string& str() const { return buf_; }

private:
    static std::string quote(const std::string& s) {
        bool need = false;
        for (char c : s)
            if (c == ',' || c == '"' || c == '\n' || c == '\r') need = true;
        if (!need) return s;
        std::string out = "\"";
        for (char c : s) {
            if (c == '"') out += '"';
            out += c;
        }
        out += '"';
        return out;
    }

    std::string buf_;
};

}  // namespace dlab
