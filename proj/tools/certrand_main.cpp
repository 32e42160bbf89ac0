#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "certrand/devices.hpp"
#include "certrand/eat.hpp"
#include "certrand/extractor.hpp"
#include "certrand/reductions.hpp"
#include "certrand/service.hpp"
#include "certrand/statlab.hpp"
#include "certrand/transcript.hpp"
#include "certrand/verifier.hpp"
#include "json.hpp"

namespace {

using namespace certrand;

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

/// Source bits for extraction: the transcript's responses, each sample
/// expanded to n bits, most significant bit first.
extractor::Bits transcript_source_bits(const verifier::Transcript& tr) {
    extractor::Bits bits;
    const int n = tr.config.n;
    for (const auto& rec : tr.rounds)
        for (auto z : rec.response)
            for (int b = n - 1; b >= 0; --b)
                bits.push_back(static_cast<std::uint8_t>((z >> b) & 1));
    return bits;
}

extractor::Bits bytes_to_bits(const std::string& raw, std::size_t bit_count) {
    if (raw.size() * 8 < bit_count) throw std::runtime_error("seed file too short");
    extractor::Bits bits(bit_count);
    for (std::size_t i = 0; i < bit_count; ++i)
        bits[i] = static_cast<std::uint8_t>((static_cast<unsigned char>(raw[i / 8]) >> (7 - i % 8)) & 1);
    return bits;
}

void write_bits_packed(const std::string& path, const extractor::Bits& bits) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    std::vector<unsigned char> bytes((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) bytes[i / 8] |= static_cast<unsigned char>(1u << (7 - i % 8));
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

int cmd_verify(const std::string& listen, const std::string& config_path, std::size_t sessions,
               const std::string& out_dir) {
    auto cfg = nlohmann::json::parse(read_file(config_path)).get<verifier::ProtocolConfig>();
    auto addr = netcli::detail::parse_address(listen);
    netcli::VerifierService service(cfg);
    std::uint16_t port = service.start(addr.host, addr.port, sessions);
    std::cerr << "listening on " << addr.host << ":" << port << "\n";
    service.wait();
    int status = 0;
    for (const auto& result : service.results()) {
        std::string sid = to_hex(result.session_id.data(), result.session_id.size());
        std::string path = out_dir + "/transcript-" + sid + ".jsonl";
        netcli::write_transcript_file(path, result.transcript);
        std::cout << nlohmann::json{{"session", sid},
                                    {"decision", verifier::decision_name(result.transcript.decision)},
                                    {"statistic", result.transcript.statistic},
                                    {"transcript", path}}
                         .dump()
                  << "\n";
        if (result.transcript.decision != verifier::Decision::Accept) status = 1;
    }
    return status;
}

int cmd_device(const std::string& connect, const std::string& model_path) {
    auto model = nlohmann::json::parse(read_file(model_path)).get<devices::DeviceModel>();
    auto addr = netcli::detail::parse_address(connect);
    auto outcome = netcli::run_device_client(addr.host, addr.port, model);
    std::cout << nlohmann::json{{"decision", outcome.decision},
                                {"statistic", outcome.statistic},
                                {"session", to_hex(outcome.session_id.data(), 16)}}
                     .dump()
              << "\n";
    return outcome.decision == "accept" ? 0 : 1;
}

int cmd_selftest(std::uint64_t trials, const std::string& key_hex) {
    RngStream rng(key_from_hex(key_hex), "selftest");
    bool all_pass = true;
    for (const auto& id : statlab::registered_lemmas()) {
        nlohmann::json params = nlohmann::json::object();
        std::uint64_t t = trials;
        if (id == "freq-dist") params["N"] = 4, params["k"] = 2;
        if (id == "lxeb-perfect" || id == "lxeb-product") {
            params["N"] = 1024;
            t = std::min<std::uint64_t>(trials, id == "lxeb-product" ? 50 : 400);
        }
        auto rep = statlab::oracle_check(id, params, t, rng);
        std::cout << nlohmann::json(rep).dump() << "\n";
        all_pass = all_pass && rep.pass;
    }
    return all_pass ? 0 : 1;
}

int cmd_certify(const std::string& transcript_path, const std::string& out_path) {
    auto parsed = netcli::read_transcript_file(transcript_path);
    if (!parsed.hash_match) {
        std::cerr << "transcript hash mismatch\n";
        return 2;
    }
    auto cert = eat::certificate_for_protocol(parsed.transcript);
    nlohmann::json j = cert;
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream f(out_path, std::ios::trunc);
        f << j.dump(2) << "\n";
    }
    return 0;
}

int cmd_extract(const std::string& transcript_path, const std::string& seed_path, std::size_t m,
                double eps, const std::string& out_path) {
    auto parsed = netcli::read_transcript_file(transcript_path);
    if (!parsed.hash_match) {
        std::cerr << "transcript hash mismatch\n";
        return 2;
    }
    extractor::Bits source = transcript_source_bits(parsed.transcript);
    auto spec = extractor::extractor_params(source.size(), m, eps);
    auto design = extractor::build_weak_design(m, spec.t);
    extractor::Bits seed = bytes_to_bits(read_file(seed_path), static_cast<std::size_t>(design.d));
    extractor::Bits out = extractor::trevisan_extract(source, seed, design);
    write_bits_packed(out_path, out);
    std::cout << nlohmann::json(spec).dump(2) << "\n";
    return 0;
}

int cmd_replay(const std::string& transcript_path) {
    auto rep = netcli::replay_transcript(transcript_path);
    nlohmann::json j{{"hash_match", rep.hash_match},
                     {"scores_match", rep.decision_report.scores_match},
                     {"decision_match", rep.decision_report.decision_match},
                     {"stored_decision", verifier::decision_name(rep.stored_decision)},
                     {"recomputed_decision",
                      verifier::decision_name(rep.decision_report.recomputed_decision)}};
    if (rep.decision_report.first_mismatch_round)
        j["first_mismatch_round"] = *rep.decision_report.first_mismatch_round;
    std::cout << j.dump(2) << "\n";
    bool ok = rep.hash_match && rep.decision_report.scores_match && rep.decision_report.decision_match;
    return ok ? 0 : 1;
}

int cmd_lemma_check(const std::string& id, std::uint64_t trials, const std::string& key_hex,
                    const std::string& params_json) {
    RngStream rng(key_from_hex(key_hex), "lemma-check/" + id);
    auto params = nlohmann::json::parse(params_json);
    auto rep = statlab::oracle_check(id, params, trials, rng);
    std::cout << nlohmann::json(rep).dump() << "\n";
    return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"certified randomness toolkit"};
    app.require_subcommand(1);
    const std::string default_key(64, '0');

    auto* verify = app.add_subcommand("verify", "run the verifier service");
    std::string listen = "127.0.0.1:7641", config_path, out_dir = ".";
    std::size_t sessions = 1;
    verify->add_option("--listen", listen, "listen address host:port")->required();
    verify->add_option("--config", config_path, "protocol config JSON")->required();
    verify->add_option("--sessions", sessions, "sessions to serve before exiting");
    verify->add_option("--out", out_dir, "transcript output directory");

    auto* device = app.add_subcommand("device", "run a device client");
    std::string connect, model_path;
    device->add_option("--connect", connect, "verifier address host:port")->required();
    device->add_option("--model", model_path, "device model JSON")->required();

    auto* selftest = app.add_subcommand("selftest", "run the lemma-check suite");
    std::uint64_t st_trials = 20000;
    std::string st_key = default_key;
    selftest->add_option("--trials", st_trials, "Monte-Carlo trials per lemma");
    selftest->add_option("--key", st_key, "hex RNG key");

    auto* certify = app.add_subcommand("certify", "entropy certificate from a transcript");
    std::string cert_transcript, cert_out;
    certify->add_option("--transcript", cert_transcript, "transcript JSONL")->required();
    certify->add_option("--out", cert_out, "certificate output path (default stdout)");

    auto* extract = app.add_subcommand("extract", "extract output bits from a transcript");
    std::string ext_transcript, ext_seed, ext_out = "out.bits";
    std::size_t ext_m = 0;
    double ext_eps = 0x1p-32;
    extract->add_option("--transcript", ext_transcript, "transcript JSONL")->required();
    extract->add_option("--seed", ext_seed, "seed file (raw bytes)")->required();
    extract->add_option("--m", ext_m, "output bits")->required();
    extract->add_option("--eps", ext_eps, "per-bit extractor error");
    extract->add_option("--out", ext_out, "output bit file");

    auto* replay = app.add_subcommand("replay", "re-verify a stored transcript");
    std::string rep_transcript;
    replay->add_option("--transcript", rep_transcript, "transcript JSONL")->required();

    auto* lemma = app.add_subcommand("lemma-check", "Monte-Carlo check one lemma");
    std::string lemma_id, lemma_key = default_key, lemma_params = "{}";
    std::uint64_t lemma_trials = 10000;
    lemma->add_option("--id", lemma_id, "lemma id")->required();
    lemma->add_option("--trials", lemma_trials, "trials");
    lemma->add_option("--key", lemma_key, "hex RNG key");
    lemma->add_option("--params", lemma_params, "parameter JSON");

    CLI11_PARSE(app, argc, argv);
    try {
        if (verify->parsed()) return cmd_verify(listen, config_path, sessions, out_dir);
        if (device->parsed()) return cmd_device(connect, model_path);
        if (selftest->parsed()) return cmd_selftest(st_trials, st_key);
        if (certify->parsed()) return cmd_certify(cert_transcript, cert_out);
        if (extract->parsed()) return cmd_extract(ext_transcript, ext_seed, ext_m, ext_eps, ext_out);
        if (replay->parsed()) return cmd_replay(rep_transcript);
        if (lemma->parsed()) return cmd_lemma_check(lemma_id, lemma_trials, lemma_key, lemma_params);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
