#include "iterfix/problem.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace iterfix {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string strip_comment(const std::string& line) {
    std::size_t pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

struct Section {
    std::string name;
    std::vector<std::string> lines;
};

std::vector<Section> split_sections(const std::string& text) {
    std::vector<Section> sections;
    std::istringstream is(text);
    std::string raw;
    while (std::getline(is, raw)) {
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw Error("bad_problem_file",
                            "malformed section header: " + line);
            sections.push_back({trim(line.substr(1, line.size() - 2)), {}});
            continue;
        }
        if (sections.empty())
            throw Error("bad_problem_file",
                        "content before the first section: " + line);
        sections.back().lines.push_back(line);
    }
    return sections;
}

std::string joined(const std::vector<std::string>& lines) {
    std::string out;
    for (const std::string& l : lines) {
        if (!out.empty()) out += ' ';
        out += l;
    }
    return out;
}

std::map<std::string, std::string> key_values(const Section& s) {
    std::map<std::string, std::string> kv;
    for (const std::string& line : s.lines) {
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("bad_problem_file",
                        "expected key = value in [" + s.name + "]: " + line);
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw Error("bad_problem_file",
                        "expected key = value in [" + s.name + "]: " + line);
        if (!kv.emplace(key, val).second)
            throw Error("bad_problem_file",
                        "duplicate key '" + key + "' in [" + s.name + "]");
    }
    return kv;
}

} // namespace

ProblemFile parse_problem_text(const std::string& text) {
    std::vector<Section> sections = split_sections(text);

    const Section* lambda_sec = nullptr;
    const Section* function_sec = nullptr;
    const Section* interval_sec = nullptr;
    const Section* params_sec = nullptr;
    const Section* options_sec = nullptr;
    bool is_G = true;
    for (const Section& s : sections) {
        if (s.name == "lambda") {
            lambda_sec = &s;
        } else if (s.name == "function G" || s.name == "function F") {
            if (function_sec)
                throw Error("bad_problem_file",
                            "only one [function ...] section is allowed");
            function_sec = &s;
            is_G = s.name == "function G";
        } else if (s.name == "interval") {
            interval_sec = &s;
        } else if (s.name == "params") {
            params_sec = &s;
        } else if (s.name == "options") {
            options_sec = &s;
        } else {
            throw Error("bad_problem_file", "unknown section [" + s.name + "]");
        }
    }
    if (!lambda_sec) throw Error("bad_problem_file", "missing [lambda]");
    if (!function_sec)
        throw Error("bad_problem_file",
                    "missing [function G] or [function F]");
    if (!interval_sec) throw Error("bad_problem_file", "missing [interval]");
    if (!params_sec) throw Error("bad_problem_file", "missing [params]");

    std::vector<double> lambda;
    for (const std::string& w : split_ws(joined(lambda_sec->lines)))
        lambda.push_back(parse_scalar(w));
    if (lambda.empty())
        throw Error("bad_problem_file", "[lambda] must list the exponents");

    std::vector<std::string> bounds = split_ws(joined(interval_sec->lines));
    if (bounds.size() != 2)
        throw Error("bad_problem_file", "[interval] must give two bounds");
    Interval interval{parse_scalar(bounds[0]), parse_scalar(bounds[1])};
    if (!(interval.a < interval.b))
        throw Error("bad_problem_file", "[interval] requires a < b");

    auto params = key_values(*params_sec);
    auto need = [&](const char* key) {
        auto it = params.find(key);
        if (it == params.end())
            throw Error("bad_problem_file",
                        std::string("[params] is missing '") + key + "'");
        return parse_scalar(it->second);
    };

    ProblemFile pf{
        .lambda = std::move(lambda),
        .function = PiecewiseExpr::parse(joined(function_sec->lines)),
        .function_is_G = is_G,
        .interval = interval,
        .delta = need("delta"),
        .M = need("M"),
        .Mstar = need("Mstar"),
        .grid = std::nullopt,
        .tol = std::nullopt,
        .max_iters = std::nullopt,
        .axis = std::nullopt,
    };
    for (const auto& [key, _] : params)
        if (key != "delta" && key != "M" && key != "Mstar")
            throw Error("bad_problem_file", "unknown key '" + key +
                                                "' in [params]");

    if (options_sec) {
        for (const auto& [key, val] : key_values(*options_sec)) {
            if (key == "grid")
                pf.grid = static_cast<int>(parse_scalar(val));
            else if (key == "tol")
                pf.tol = parse_scalar(val);
            else if (key == "max_iters")
                pf.max_iters = static_cast<int>(parse_scalar(val));
            else if (key == "axis")
                pf.axis = val;
            else
                throw Error("bad_problem_file",
                            "unknown key '" + key + "' in [options]");
        }
    }
    return pf;
}

ProblemFile load_problem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("io_error", "cannot open problem file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_problem_text(ss.str());
}

} // namespace iterfix
