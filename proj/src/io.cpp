#include "gglangevin/io.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>

namespace gg {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw std::invalid_argument("config: bad section header at line " +
                                            std::to_string(lineno));
            }
            section = trim(line.substr(1, line.size() - 2));
            cfg.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: expected key=value at line " + std::to_string(lineno));
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config: empty key at line " + std::to_string(lineno));
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto sit = sections_.find(section);
    return sit != sections_.end() && sit->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key) const {
    const auto sit = sections_.find(section);
    if (sit == sections_.end() || sit->second.count(key) == 0) {
        throw std::invalid_argument("config: missing [" + section + "] " + key);
    }
    return sit->second.at(key);
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    return std::stod(get(section, key));
}

long Config::get_long(const std::string& section, const std::string& key, long fallback) const {
    if (!has(section, key)) return fallback;
    return std::stol(get(section, key));
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key,
                              std::uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    return std::stoull(get(section, key));
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: bad boolean for [" + section + "] " + key);
}

std::vector<double> Config::get_doubles(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    std::istringstream in(get(section, key));
    double v;
    while (in >> v) out.push_back(v);
    return out;
}

std::vector<std::string> Config::get_strings(const std::string& section, const std::string& key) const {
    std::vector<std::string> out;
    std::istringstream in(get(section, key));
    std::string v;
    while (in >> v) out.push_back(v);
    return out;
}

void Config::require_known(const std::map<std::string, std::set<std::string>>& schema) const {
    for (const auto& [section, kv] : sections_) {
        const auto sit = schema.find(section);
        if (sit == schema.end()) {
            throw std::invalid_argument("config: unknown section [" + section + "]");
        }
        for (const auto& [key, value] : kv) {
            (void)value;
            if (sit->second.count(key) == 0) {
                throw std::invalid_argument("config: unknown key '" + key + "' in [" + section + "]");
            }
        }
    }
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = value;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& schema,
                     const std::vector<std::string>& columns)
    : out_(path), columns_(columns.size()) {
    if (!out_) throw std::runtime_error("csv: cannot open " + path);
    out_ << "# schema=" << schema << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    }
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::invalid_argument("csv: wrong cell count");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out_ << cells[i] << (i + 1 < cells.size() ? "," : "\n");
    }
}

void CsvWriter::row_values(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(fmt_double(v));
    row(cells);
}

SceneSvg::SceneSvg(int size_px) : size_(size_px) {}

double SceneSvg::sx(double x) const { return (x + 1.0) * 0.5 * size_; }
double SceneSvg::sy(double y) const { return (1.0 - y) * 0.5 * size_; }

namespace {
std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}
}  // namespace

void SceneSvg::polyline(const std::vector<Vec2>& pts, bool closed, const std::string& stroke,
                        double width_px) {
    if (pts.size() < 2) return;
    body_ += closed ? "<polygon points=\"" : "<polyline points=\"";
    for (const Vec2& p : pts) body_ += svg_num(sx(p.x)) + "," + svg_num(sy(p.y)) + " ";
    body_ += "\" fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + svg_num(width_px) + "\"/>\n";
}

void SceneSvg::points(const std::vector<Vec2>& pts, double radius_px, const std::string& fill) {
    for (const Vec2& p : pts) {
        body_ += "<circle cx=\"" + svg_num(sx(p.x)) + "\" cy=\"" + svg_num(sy(p.y)) + "\" r=\"" +
                 svg_num(radius_px) + "\" fill=\"" + fill + "\"/>\n";
    }
}

void SceneSvg::caption(const std::string& text) {
    body_ += "<text x=\"8\" y=\"18\" font-family=\"monospace\" font-size=\"14\">" + text + "</text>\n";
}

void SceneSvg::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("svg: cannot open " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size_ << "\" height=\"" << size_
        << "\" viewBox=\"0 0 " << size_ << " " << size_ << "\">\n";
    out << "<rect width=\"" << size_ << "\" height=\"" << size_ << "\" fill=\"white\"/>\n";
    out << body_;
    out << "</svg>\n";
}

XyChart::XyChart(double xmin, double xmax, double ymin, double ymax, int w, int h)
    : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax), w_(w), h_(h) {}

double XyChart::sx(double x) const { return (x - xmin_) / (xmax_ - xmin_) * (w_ - 40) + 30; }
double XyChart::sy(double y) const { return (1.0 - (y - ymin_) / (ymax_ - ymin_)) * (h_ - 40) + 10; }

void XyChart::curve(const std::vector<double>& xs, const std::vector<double>& ys,
                    const std::string& stroke, double width_px) {
    if (xs.size() != ys.size() || xs.size() < 2) return;
    body_ += "<polyline points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        body_ += svg_num(sx(xs[i])) + "," + svg_num(sy(ys[i])) + " ";
    }
    body_ += "\" fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + svg_num(width_px) + "\"/>\n";
}

void XyChart::bars(const std::vector<double>& edges, const std::vector<double>& heights,
                   const std::string& fill) {
    if (edges.size() != heights.size() + 1) return;
    for (std::size_t i = 0; i < heights.size(); ++i) {
        const double x0 = sx(edges[i]);
        const double x1 = sx(edges[i + 1]);
        const double y0 = sy(heights[i]);
        const double y1 = sy(0.0);
        body_ += "<rect x=\"" + svg_num(x0) + "\" y=\"" + svg_num(y0) + "\" width=\"" +
                 svg_num(x1 - x0) + "\" height=\"" + svg_num(std::max(0.0, y1 - y0)) +
                 "\" fill=\"" + fill + "\" fill-opacity=\"0.45\"/>\n";
    }
}

void XyChart::caption(const std::string& text) {
    body_ += "<text x=\"34\" y=\"20\" font-family=\"monospace\" font-size=\"13\">" + text + "</text>\n";
}

void XyChart::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("svg: cannot open " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_
        << "\" viewBox=\"0 0 " << w_ << " " << h_ << "\">\n";
    out << "<rect width=\"" << w_ << "\" height=\"" << h_ << "\" fill=\"white\"/>\n";
    out << body_;
    out << "</svg>\n";
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw std::runtime_error("cannot create directory " + path + ": " + ec.message());
}

bool files_identical(const std::string& a, const std::string& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return sa.str() == sb.str();
}

}  // namespace gg
