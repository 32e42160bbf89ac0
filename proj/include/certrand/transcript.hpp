#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "certrand/prf.hpp"
#include "certrand/verifier.hpp"
#include "json.hpp"

namespace certrand::netcli {

/// JSONL form: one header line with the config, one line per round, one
/// trailer with the decision and the SHA-256 over all preceding bytes.
inline std::string transcript_to_jsonl(const verifier::Transcript& tr) {
    std::ostringstream out;
    nlohmann::json header{{"config", tr.config}, {"record", "header"}};
    out << header.dump() << "\n";
    for (const auto& rec : tr.rounds) {
        nlohmann::json line = rec;
        line["record"] = "round";
        out << line.dump() << "\n";
    }
    for (const auto& es : tr.epochs) {
        nlohmann::json line = es;
        line["record"] = "epoch";
        out << line.dump() << "\n";
    }
    std::string body = out.str();
    nlohmann::json trailer{{"decision", verifier::decision_name(tr.decision)},
                           {"error", tr.error},
                           {"record", "trailer"},
                           {"statistic", tr.statistic},
                           {"transcript_hash", to_hex(sha256(body).data(), 32)}};
    return body + trailer.dump() + "\n";
}

struct ParsedTranscript {
    verifier::Transcript transcript;
    std::string stored_hash;
    bool hash_match = false;
};

inline ParsedTranscript transcript_from_jsonl(const std::string& text) {
    ParsedTranscript out;
    std::istringstream in(text);
    std::string line;
    std::string body;
    bool have_header = false, have_trailer = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        std::string record = j.at("record").get<std::string>();
        if (record == "trailer") {
            out.transcript.decision =
                verifier::decision_from_name(j.at("decision").get<std::string>());
            out.transcript.statistic = j.at("statistic").get<double>();
            out.transcript.error = j.value("error", std::string{});
            out.stored_hash = j.at("transcript_hash").get<std::string>();
            have_trailer = true;
            break;
        }
        body += line + "\n";
        if (record == "header") {
            out.transcript.config = j.at("config").get<verifier::ProtocolConfig>();
            have_header = true;
        } else if (record == "round") {
            out.transcript.rounds.push_back(j.get<verifier::RoundRecord>());
        } else if (record == "epoch") {
            out.transcript.epochs.push_back(j.get<verifier::EpochSummary>());
        } else {
            throw std::invalid_argument("transcript: unknown record kind " + record);
        }
    }
    if (!have_header || !have_trailer)
        throw std::invalid_argument("transcript: missing header or trailer");
    out.hash_match = to_hex(sha256(body).data(), 32) == out.stored_hash;
    return out;
}

inline void write_transcript_file(const std::string& path, const verifier::Transcript& tr) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open transcript file for writing: " + path);
    f << transcript_to_jsonl(tr);
}

inline ParsedTranscript read_transcript_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open transcript file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return transcript_from_jsonl(buf.str());
}

struct ReplayFileReport {
    bool hash_match = false;
    verifier::ReplayReport decision_report;
    std::string stored_hash;
    verifier::Decision stored_decision = verifier::Decision::Abort;
};

inline ReplayFileReport replay_transcript(const std::string& path) {
    ParsedTranscript parsed = read_transcript_file(path);
    ReplayFileReport rep;
    rep.hash_match = parsed.hash_match;
    rep.stored_hash = parsed.stored_hash;
    rep.stored_decision = parsed.transcript.decision;
    try {
        rep.decision_report = verifier::replay_decision(parsed.transcript);
    } catch (const std::exception&) {
        // Tampered or corrupt rounds can carry unscorable samples; report a
        // mismatch instead of propagating.
        rep.decision_report.scores_match = false;
        rep.decision_report.decision_match = false;
        rep.decision_report.first_mismatch_round = 0;
    }
    return rep;
}

}  // namespace certrand::netcli
