#ifndef GGLANGEVIN_IO_HPP
#define GGLANGEVIN_IO_HPP

#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gglangevin/core.hpp"

namespace gg {

/// Flat key=value configuration grouped in [section] blocks. '#' starts a
/// comment. Unknown keys are rejected against a per-command schema before any
/// work starts.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long get_long(const std::string& section, const std::string& key, long fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
    std::vector<std::string> get_strings(const std::string& section, const std::string& key) const;

    // Throws std::invalid_argument naming the first unknown section or key.
    void require_known(const std::map<std::string, std::set<std::string>>& schema) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// Decimal with 17 significant digits; round-trips doubles exactly.
std::string fmt_double(double v);

/// CSV with a schema-version comment line and a header row. All numeric cells
/// go through fmt_double so reruns are byte-identical.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& schema,
              const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& cells);
    void row_values(const std::vector<double>& values);

private:
    std::ofstream out_;
    std::size_t columns_ = 0;
};

/// Self-contained SVG over the scene square [-1,1]^2.
class SceneSvg {
public:
    explicit SceneSvg(int size_px = 640);
    void polyline(const std::vector<Vec2>& pts, bool closed, const std::string& stroke,
                  double width_px);
    void points(const std::vector<Vec2>& pts, double radius_px, const std::string& fill);
    void caption(const std::string& text);
    void save(const std::string& path) const;

private:
    double sx(double x) const;
    double sy(double y) const;
    int size_;
    std::string body_;
};

/// Minimal XY chart (curves + histogram bars) for the 1D toy figures.
class XyChart {
public:
    XyChart(double xmin, double xmax, double ymin, double ymax, int w = 720, int h = 420);
    void curve(const std::vector<double>& xs, const std::vector<double>& ys,
               const std::string& stroke, double width_px = 2.0);
    void bars(const std::vector<double>& edges, const std::vector<double>& heights,
              const std::string& fill);
    void caption(const std::string& text);
    void save(const std::string& path) const;

private:
    double sx(double x) const;
    double sy(double y) const;
    double xmin_, xmax_, ymin_, ymax_;
    int w_, h_;
    std::string body_;
};

void ensure_directory(const std::string& path);
bool files_identical(const std::string& a, const std::string& b);

}  // namespace gg

#endif
