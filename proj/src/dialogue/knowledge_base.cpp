#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cbai/dialogue.hpp"
#include "cbai/error.hpp"

namespace cbai {

const std::vector<std::string>* KnowledgeBase::find(std::string_view category) const {
    const auto it = entries.find(std::string(category));
    return it == entries.end() ? nullptr : &it->second;
}

KnowledgeBase default_knowledge_base() {
    KnowledgeBase kb;
    kb.entries["NAME"] = {"Anna", "Mayer", "Anna Mayer", "David Mayer", "Laura", "Oliver",
                          "Peter", "Sophia", "Tim", "Marianne", "Maria", "Felix"};
    kb.entries["ADDRESS"] = {"15 Flowerstreet", "7 Southroad", "104 Mainstreet",
                             "28 Bumblebee Lane", "56 Park Avenue", "7 St. Michael Road"};
    return kb;
}

KnowledgeBase parse_knowledge_base(std::string_view json) {
    KnowledgeBase kb;
    try {
        const auto j = nlohmann::json::parse(json);
        if (!j.is_object()) throw Error(ErrorCode::ParseError, "knowledge base must be a JSON object");
        for (const auto& [category, list] : j.items()) {
            auto values = list.get<std::vector<std::string>>();
            if (values.empty()) {
                throw Error(ErrorCode::InvalidArgument, "knowledge base list '" + category + "' is empty");
            }
            kb.entries[category] = std::move(values);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("knowledge base: ") + e.what());
    }
    return kb;
}

KnowledgeBase load_knowledge_base(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open knowledge base " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_knowledge_base(buf.str());
}

std::string format_knowledge_base(const KnowledgeBase& kb) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [category, list] : kb.entries) j[category] = list;
    return j.dump(2) + "\n";
}

}  // namespace cbai
