#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace vaxrag {

struct ChatRequest {
    std::string system;
    std::string user;

    /// system + blank line + user; what a single-string model would see.
    std::string text() const;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    /// Throws ProviderError.
    virtual std::string complete(const ChatRequest& request) const = 0;
    virtual std::string model_id() const = 0;
};

/// A prompt template file: optional leading "#" comment lines, then a
/// "[system]" section and a "[user]" section. Placeholders are {{name}}.
struct PromptTemplate {
    std::string name;
    std::string system;
    std::string user;

    static PromptTemplate parse(std::string_view name, std::string_view source);

    /// Substitutes placeholders in a single pass; substituted values are not
    /// rescanned. Throws std::invalid_argument for a placeholder missing from `vars`.
    ChatRequest render(const std::map<std::string, std::string>& vars) const;
};

/// Raw contents of a template shipped in core/templates (compiled in).
/// Throws std::out_of_range for an unknown name.
std::string_view template_source(std::string_view name);
std::vector<std::string> template_names();

/// Parsed, cached template by name.
const PromptTemplate& shipped_template(std::string_view name);

} // namespace vaxrag
