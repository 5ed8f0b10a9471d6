#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace slideeval::xml {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Element node. Lookups use local names, so namespace prefixes are ignored.
struct Node {
    std::string name;  // qualified, as written
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<std::unique_ptr<Node>> children;
    std::string text;  // character data directly inside this element

    std::string_view local() const;
    const Node* child(std::string_view local_name) const;
    std::vector<const Node*> all(std::string_view local_name) const;
    /// First descendant (depth-first) with this local name.
    const Node* find(std::string_view local_name) const;
    /// Attribute by local name.
    std::optional<std::string_view> attr(std::string_view local_name) const;
};

std::unique_ptr<Node> parse(std::string_view text);

}  // namespace slideeval::xml
