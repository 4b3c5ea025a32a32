#include "ssplab/transcript.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ssplab {

std::string transcript_to_jsonl(const Transcript& t) {
    std::string out;
    for (size_t i = 0; i < t.size(); ++i) {
        nlohmann::ordered_json j;
        j["seq"] = i;
        j["sender"] = role_name(t[i].sender);
        j["kind"] = message_kind_name(t[i].kind);
        if (t[i].round > 0)
            j["round"] = t[i].round;
        else
            j["round"] = nullptr;
        j["payload_hex"] = to_hex(t[i].payload);
        out += j.dump();
        out += '\n';
    }
    return out;
}

Transcript transcript_from_jsonl(std::istream& in) {
    Transcript t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        Message m;
        std::string sender = j.at("sender").get<std::string>();
        if (sender != "A" && sender != "B") throw std::runtime_error("bad transcript sender");
        m.sender = sender == "A" ? Role::Initiator : Role::Responder;
        auto kind = message_kind_from_name(j.at("kind").get<std::string>());
        if (!kind) throw std::runtime_error("bad transcript message kind");
        m.kind = *kind;
        m.round = j.at("round").is_null() ? 0 : j.at("round").get<int>();
        m.payload = from_hex(j.at("payload_hex").get<std::string>());
        t.push_back(std::move(m));
    }
    return t;
}

Transcript transcript_from_jsonl_string(const std::string& s) {
    std::istringstream in(s);
    return transcript_from_jsonl(in);
}

void write_transcript_file(const Transcript& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << transcript_to_jsonl(t);
}

Transcript read_transcript_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return transcript_from_jsonl(in);
}

}  // namespace ssplab
