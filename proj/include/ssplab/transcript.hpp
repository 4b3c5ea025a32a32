#ifndef SSPLAB_TRANSCRIPT_HPP
#define SSPLAB_TRANSCRIPT_HPP

#include <iosfwd>
#include <string>

#include "ssplab/protocol.hpp"

namespace ssplab {

// JSON-lines transcript format: one object per message,
// {"seq":N,"sender":"A"|"B","kind":...,"round":N|null,"payload_hex":...}.
// This is the exchange format between the protocol, adversary and sim layers.
std::string transcript_to_jsonl(const Transcript& t);
Transcript transcript_from_jsonl(std::istream& in);
Transcript transcript_from_jsonl_string(const std::string& s);

void write_transcript_file(const Transcript& t, const std::string& path);
Transcript read_transcript_file(const std::string& path);

}  // namespace ssplab

#endif
