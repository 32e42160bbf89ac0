#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "certrand/common.hpp"
#include "json.hpp"

namespace certrand::netcli {

enum class MessageType { Hello, Challenge, Response, DecisionMsg, Error };

inline std::string message_type_name(MessageType t) {
    switch (t) {
        case MessageType::Hello: return "hello";
        case MessageType::Challenge: return "challenge";
        case MessageType::Response: return "response";
        case MessageType::DecisionMsg: return "decision";
        case MessageType::Error: return "error";
    }
    throw std::logic_error("message_type_name: bad type");
}

inline MessageType message_type_from_name(const std::string& s) {
    if (s == "hello") return MessageType::Hello;
    if (s == "challenge") return MessageType::Challenge;
    if (s == "response") return MessageType::Response;
    if (s == "decision") return MessageType::DecisionMsg;
    if (s == "error") return MessageType::Error;
    throw std::invalid_argument("unknown message type: " + s);
}

struct WireMessage {
    MessageType type = MessageType::Hello;
    std::array<std::uint8_t, 16> session_id{};
    std::uint64_t round = 0;
    nlohmann::json payload = nlohmann::json::object();

    bool operator==(const WireMessage& other) const {
        return type == other.type && session_id == other.session_id && round == other.round &&
               payload == other.payload;
    }
};

inline constexpr std::size_t kMaxFrameBytes = 16 * 1024 * 1024;

/// Length-prefixed frame: 4-byte big-endian body length, then the
/// canonical (lexicographically key-ordered, minimal) JSON body.
inline Bytes encode_message(const WireMessage& msg) {
    nlohmann::json body{{"payload", msg.payload},
                        {"round", msg.round},
                        {"session_id", to_hex(msg.session_id.data(), msg.session_id.size())},
                        {"type", message_type_name(msg.type)}};
    std::string text = body.dump();
    if (text.size() > kMaxFrameBytes) throw std::length_error("encode_message: oversize frame");
    Bytes out(4 + text.size());
    const auto len = static_cast<std::uint32_t>(text.size());
    out[0] = static_cast<std::uint8_t>(len >> 24);
    out[1] = static_cast<std::uint8_t>(len >> 16);
    out[2] = static_cast<std::uint8_t>(len >> 8);
    out[3] = static_cast<std::uint8_t>(len);
    std::copy(text.begin(), text.end(), out.begin() + 4);
    return out;
}

inline WireMessage decode_body(const std::uint8_t* data, std::size_t size) {
    nlohmann::json body = nlohmann::json::parse(data, data + size);  // throws on malformed JSON
    if (!body.is_object() || !body.contains("type") || !body.contains("session_id") ||
        !body.contains("round") || !body.contains("payload") || body.size() != 4)
        throw std::invalid_argument("decode_message: schema violation");
    WireMessage msg;
    msg.type = message_type_from_name(body.at("type").get<std::string>());
    std::string sid = body.at("session_id").get<std::string>();
    if (sid.size() != 32) throw std::invalid_argument("decode_message: bad session id");
    for (std::size_t i = 0; i < 16; ++i)
        msg.session_id[i] = static_cast<std::uint8_t>(std::stoul(sid.substr(2 * i, 2), nullptr, 16));
    msg.round = body.at("round").get<std::uint64_t>();
    msg.payload = body.at("payload");
    return msg;
}

inline WireMessage decode_message(const Bytes& frame) {
    if (frame.size() < 4) throw std::invalid_argument("decode_message: truncated frame");
    std::size_t len = (std::size_t{frame[0]} << 24) | (std::size_t{frame[1]} << 16) |
                      (std::size_t{frame[2]} << 8) | std::size_t{frame[3]};
    if (len > kMaxFrameBytes) throw std::length_error("decode_message: oversize frame");
    if (frame.size() != 4 + len) throw std::invalid_argument("decode_message: length mismatch");
    return decode_body(frame.data() + 4, len);
}

}  // namespace certrand::netcli
