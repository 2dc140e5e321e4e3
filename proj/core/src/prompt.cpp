#include "vaxrag/prompt.hpp"

#include <mutex>
#include <stdexcept>
#include <unordered_map>

#include "vaxrag/text.hpp"

namespace vaxrag {

// Defined in the generated templates_data.cpp.
namespace detail {
extern const std::map<std::string_view, std::string_view> kTemplateSources;
}

std::string ChatRequest::text() const {
    return system + "\n\n" + user;
}

PromptTemplate PromptTemplate::parse(std::string_view name, std::string_view source) {
    constexpr std::string_view kSystem = "[system]\n";
    constexpr std::string_view kUser = "[user]\n";
    const auto sys = source.find(kSystem);
    const auto usr = source.find(kUser);
    if (sys == std::string_view::npos || usr == std::string_view::npos || usr < sys) {
        throw std::invalid_argument("template " + std::string(name) + " lacks [system]/[user] sections");
    }
    PromptTemplate t;
    t.name = std::string(name);
    t.system = std::string(text::trim(source.substr(sys + kSystem.size(), usr - sys - kSystem.size())));
    t.user = std::string(text::trim(source.substr(usr + kUser.size())));
    return t;
}

namespace {

std::string substitute(std::string_view tmpl, const std::map<std::string, std::string>& vars,
                       std::string_view template_name) {
    std::string out;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        const auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        out.append(tmpl.substr(pos, open - pos));
        const std::string key(tmpl.substr(open + 2, close - open - 2));
        const auto it = vars.find(key);
        if (it == vars.end()) {
            throw std::invalid_argument("template " + std::string(template_name) + ": no value for {{" + key + "}}");
        }
        out.append(it->second);
        pos = close + 2;
    }
    return out;
}

} // namespace

ChatRequest PromptTemplate::render(const std::map<std::string, std::string>& vars) const {
    return ChatRequest{substitute(system, vars, name), substitute(user, vars, name)};
}

std::string_view template_source(std::string_view name) {
    const auto it = detail::kTemplateSources.find(name);
    if (it == detail::kTemplateSources.end()) {
        throw std::out_of_range("unknown prompt template: " + std::string(name));
    }
    return it->second;
}

std::vector<std::string> template_names() {
    std::vector<std::string> out;
    for (const auto& [name, _] : detail::kTemplateSources) {
        out.emplace_back(name);
    }
    return out;
}

const PromptTemplate& shipped_template(std::string_view name) {
    static std::mutex mutex;
    static std::unordered_map<std::string, PromptTemplate> cache;
    std::lock_guard lock(mutex);
    const std::string key(name);
    if (auto it = cache.find(key); it != cache.end()) {
        return it->second;
    }
    return cache.emplace(key, PromptTemplate::parse(name, template_source(name))).first->second;
}

} // namespace vaxrag
