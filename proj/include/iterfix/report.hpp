#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace iterfix {

// Minimal JSON document builder with insertion-ordered objects and a fixed
// number format (17 significant digits), so identical inputs always produce
// byte-identical reports. NaN / infinity serialize as null.
class Json {
public:
    static Json object();
    static Json array();
    static Json string(std::string s);
    static Json number(double v);
    static Json integer(std::int64_t v);
    static Json boolean(bool b);
    static Json null();

    Json& set(const std::string& key, Json v); // object only
    Json& push(Json v);                        // array only

    std::string dump(int indent = 2) const;

    Json(const Json&);
    Json(Json&&) noexcept;
    Json& operator=(const Json&);
    Json& operator=(Json&&) noexcept;
    ~Json();

private:
    struct Impl;
    Json();
    static void dump_rec(const Impl* impl, int indent, int depth,
                         std::string& out);
    std::unique_ptr<Impl> impl_;
};

} // namespace iterfix
