#include "xml.hpp"

#include <expat.h>

namespace slideeval::xml {

namespace {

std::string_view strip_prefix(std::string_view name) {
    const auto colon = name.find(':');
    return colon == std::string_view::npos ? name : name.substr(colon + 1);
}

struct Builder {
    std::unique_ptr<Node> root;
    std::vector<Node*> stack;
};

void on_start(void* data, const XML_Char* name, const XML_Char** atts) {
    auto* b = static_cast<Builder*>(data);
    auto node = std::make_unique<Node>();
    node->name = name;
    for (int i = 0; atts[i]; i += 2) node->attrs.emplace_back(atts[i], atts[i + 1]);
    Node* raw = node.get();
    if (b->stack.empty()) b->root = std::move(node);
    else b->stack.back()->children.push_back(std::move(node));
    b->stack.push_back(raw);
}

void on_end(void* data, const XML_Char*) { static_cast<Builder*>(data)->stack.pop_back(); }

void on_text(void* data, const XML_Char* s, int len) {
    auto* b = static_cast<Builder*>(data);
    if (!b->stack.empty()) b->stack.back()->text.append(s, static_cast<std::size_t>(len));
}

}  // namespace

std::string_view Node::local() const { return strip_prefix(name); }

const Node* Node::child(std::string_view local_name) const {
    for (const auto& c : children) {
        if (c->local() == local_name) return c.get();
    }
    return nullptr;
}

std::vector<const Node*> Node::all(std::string_view local_name) const {
    std::vector<const Node*> out;
    for (const auto& c : children) {
        if (c->local() == local_name) out.push_back(c.get());
    }
    return out;
}

const Node* Node::find(std::string_view local_name) const {
    for (const auto& c : children) {
        if (c->local() == local_name) return c.get();
        if (const Node* hit = c->find(local_name)) return hit;
    }
    return nullptr;
}

std::optional<std::string_view> Node::attr(std::string_view local_name) const {
    for (const auto& [k, v] : attrs) {
        if (strip_prefix(k) == local_name) return std::string_view(v);
    }
    return std::nullopt;
}

std::unique_ptr<Node> parse(std::string_view text) {
    XML_Parser p = XML_ParserCreate("UTF-8");
    if (!p) throw ParseError("cannot create XML parser");
    Builder b;
    XML_SetUserData(p, &b);
    XML_SetElementHandler(p, on_start, on_end);
    XML_SetCharacterDataHandler(p, on_text);
    const auto status = XML_Parse(p, text.data(), static_cast<int>(text.size()), 1);
    std::string err;
    if (status != XML_STATUS_OK) {
        err = std::string(XML_ErrorString(XML_GetErrorCode(p))) + " at line " +
              std::to_string(XML_GetCurrentLineNumber(p));
    }
    XML_ParserFree(p);
    if (!err.empty()) throw ParseError(err);
    if (!b.root) throw ParseError("document has no root element");
    return std::move(b.root);
}

}  // namespace slideeval::xml
