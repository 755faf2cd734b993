#include "iterfix/report.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace iterfix {

struct Json::Impl {
    enum class Kind { Object, Array, String, Number, Integer, Boolean, Null };
    Kind kind = Kind::Null;
    std::vector<std::pair<std::string, Json>> members;
    std::vector<Json> items;
    std::string str;
    double num = 0.0;
    std::int64_t integer = 0;
    bool boolean = false;
};

Json::Json() : impl_(std::make_unique<Impl>()) {}
Json::Json(const Json& other) : impl_(std::make_unique<Impl>(*other.impl_)) {}
Json::Json(Json&&) noexcept = default;
Json& Json::operator=(const Json& other) {
    impl_ = std::make_unique<Impl>(*other.impl_);
    return *this;
}
Json& Json::operator=(Json&&) noexcept = default;
Json::~Json() = default;

Json Json::object() {
    Json j;
    j.impl_->kind = Impl::Kind::Object;
    return j;
}
Json Json::array() {
    Json j;
    j.impl_->kind = Impl::Kind::Array;
    return j;
}
Json Json::string(std::string s) {
    Json j;
    j.impl_->kind = Impl::Kind::String;
    j.impl_->str = std::move(s);
    return j;
}
Json Json::number(double v) {
    Json j;
    j.impl_->kind = Impl::Kind::Number;
    j.impl_->num = v;
    return j;
}
Json Json::integer(std::int64_t v) {
    Json j;
    j.impl_->kind = Impl::Kind::Integer;
    j.impl_->integer = v;
    return j;
}
Json Json::boolean(bool b) {
    Json j;
    j.impl_->kind = Impl::Kind::Boolean;
    j.impl_->boolean = b;
    return j;
}
Json Json::null() { return Json(); }

Json& Json::set(const std::string& key, Json v) {
    if (impl_->kind != Impl::Kind::Object)
        throw std::logic_error("set() on a non-object");
    impl_->members.emplace_back(key, std::move(v));
    return *this;
}

Json& Json::push(Json v) {
    if (impl_->kind != Impl::Kind::Array)
        throw std::logic_error("push() on a non-array");
    impl_->items.push_back(std::move(v));
    return *this;
}

namespace {

void escape_into(const std::string& s, std::string& out) {
    out += '"';
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    out += '"';
}

void newline(int indent, int depth, std::string& out) {
    out += '\n';
    out.append(static_cast<std::size_t>(indent * depth), ' ');
}

} // namespace

void Json::dump_rec(const Json::Impl* impl, int indent, int depth,
                    std::string& out) {
    using Kind = Json::Impl::Kind;
    switch (impl->kind) {
    case Kind::Null: out += "null"; break;
    case Kind::Boolean: out += impl->boolean ? "true" : "false"; break;
    case Kind::Integer: {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%lld",
                      static_cast<long long>(impl->integer));
        out += buf;
        break;
    }
    case Kind::Number: {
        if (!std::isfinite(impl->num)) {
            out += "null";
            break;
        }
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", impl->num);
        out += buf;
        break;
    }
    case Kind::String: escape_into(impl->str, out); break;
    case Kind::Object: {
        if (impl->members.empty()) {
            out += "{}";
            break;
        }
        out += '{';
        for (std::size_t i = 0; i < impl->members.size(); ++i) {
            newline(indent, depth + 1, out);
            escape_into(impl->members[i].first, out);
            out += ": ";
            dump_rec(impl->members[i].second.impl_.get(), indent, depth + 1,
                     out);
            if (i + 1 < impl->members.size()) out += ',';
        }
        newline(indent, depth, out);
        out += '}';
        break;
    }
    case Kind::Array: {
        if (impl->items.empty()) {
            out += "[]";
            break;
        }
        out += '[';
        for (std::size_t i = 0; i < impl->items.size(); ++i) {
            newline(indent, depth + 1, out);
            dump_rec(impl->items[i].impl_.get(), indent, depth + 1, out);
            if (i + 1 < impl->items.size()) out += ',';
        }
        newline(indent, depth, out);
        out += ']';
        break;
    }
    }
}

std::string Json::dump(int indent) const {
    std::string out;
    dump_rec(impl_.get(), indent, 0, out);
    out += '\n';
    return out;
}

} // namespace iterfix
