#include "genpool/rng.hpp"
#include "genpool/tensor_io.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

using namespace genpool;

namespace {

const std::filesystem::path kDir = [] {
    const auto d = std::filesystem::temp_directory_path() / "genpool_cli_tests";
    std::filesystem::create_directories(d);
    return d;
}();

std::string path(const std::string& name) { return (kDir / name).string(); }

std::string read_bytes(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(const std::string& args) {
    const std::string cmd = std::string(GENPOOL_CLI) + " " + args + " > " + path("stdout.txt") + " 2> " +
                            path("stderr.txt");
    const int status = std::system(cmd.c_str());
    const int code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    return {code, read_bytes(path("stdout.txt")), read_bytes(path("stderr.txt"))};
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("pool gap") {
    write_npy(Mat{{1, 3}, {5, 7}}, path("x.npy"));
    const Run r = cli("pool --input " + path("x.npy") + " --method gap --out " + path("u.npy"));
    CHECK(r.code == 0);
    CHECK(r.err.empty());
    const NpyArray u = read_npy(path("u.npy"));
    CHECK(u.header.shape == std::vector<std::size_t>{2});
    CHECK(u.data == Mat{{2}, {6}});
}

TEST_CASE("pool simpool is reproducible") {
    Rng rng(1);
    write_npy(rng.uniform_mat(16, 25, 0, 1), path("f.npy"));
    const std::string base = "pool --input " + path("f.npy") + " --method simpool --gamma 2 --width 5 ";
    CHECK(cli(base + "--seed 7 --out " + path("s1.npy") + " --attn-out " + path("a1.npy")).code == 0);
    CHECK(cli(base + "--seed 7 --out " + path("s2.npy") + " --attn-out " + path("a2.npy")).code == 0);
    CHECK(read_bytes(path("s1.npy")) == read_bytes(path("s2.npy")));
    CHECK(read_bytes(path("a1.npy")) == read_bytes(path("a2.npy")));
    CHECK(cli(base + "--out " + path("s3.npy") + " --seed 8").code == 0);
    CHECK(read_bytes(path("s1.npy")) != read_bytes(path("s3.npy")));
}

TEST_CASE("exit codes") {
    write_npy(Mat{{1, 3}, {5, 7}}, path("x.npy"));
    const Run eps = cli("pool --input " + path("x.npy") + " --method sinkhorn-otk --epsilon 0");
    CHECK(eps.code == 1);
    CHECK(eps.err.find("epsilon") != std::string::npos);
    CHECK(cli("pool --input " + path("missing.npy") + " --method gap").code == 2);
    CHECK(cli("pool --input " + path("x.npy") + " --method avgpool").code == 1);
    CHECK(cli("pool --input " + path("x.npy") + " --method max --attn-out " + path("a.npy")).code == 1);
    CHECK(cli("no-such-command").code == 1);
    CHECK(cli("pool --input " + path("x.npy") + " --method simpool --no-layernorm --gamma -1").code == 1);
}

TEST_CASE("config file with flag overrides") {
    write_npy(Mat{{1, 3}, {5, 7}}, path("x.npy"));
    {
        std::ofstream cfg(path("run.json"));
        cfg << R"({"method": "gem", "gamma": 1, "input": ")" << path("x.npy") << R"(", "output": ")" << path("g.npy")
            << "\"}";
    }
    CHECK(cli("pool --config " + path("run.json")).code == 0);
    CHECK(read_npy(path("g.npy")).data == Mat{{2}, {6}});
    CHECK(cli("pool --config " + path("run.json") + " --method max").code == 0);
    CHECK(read_npy(path("g.npy")).data == Mat{{3}, {7}});
    {
        std::ofstream bad(path("bad.json"));
        bad << R"({"methd": "gap"})";
    }
    CHECK(cli("pool --config " + path("bad.json")).code == 1);
}

TEST_CASE("attnmap") {
    write_npy(Mat{{0.05}, {0.4}, {0.3}, {0.05}, {0.1}, {0.1}}, path("a.npy"));
    const Run r = cli("attnmap --attn " + path("a.npy") + " --width 3 --height 2 --bbox --pgm " + path("a.pgm") +
                      " --mask-pgm " + path("m.pgm"));
    CHECK(r.code == 0);
    CHECK(r.out == "1 0 2 0\n");
    CHECK(read_bytes(path("m.pgm")) == std::string("P5\n3 2\n255\n\x00\xff\xff\x00\x00\x00", 17));
    CHECK(read_bytes(path("a.pgm")).size() == 11 + 6);
    CHECK(cli("attnmap --attn " + path("a.npy") + " --width 4 --height 2").code == 1);
}

TEST_CASE("gradcheck") {
    const Run ok = cli("gradcheck --trials 2");
    CHECK(ok.code == 0);
    CHECK(ok.out.find("all gradients pass") != std::string::npos);
    CHECK(cli("gradcheck --trials 1 --tol 1e-12").code == 3);
    CHECK(cli("gradcheck --d 1").code == 1);
    CHECK(cli("gradcheck --h 1").code == 1);
}

TEST_CASE("tournament") {
    const Run a = cli("tournament --d 16 --p 64 --seed 3 --out " + path("t1.tsv"));
    CHECK(a.code == 0);
    CHECK(cli("tournament --d 16 --p 64 --seed 3 --out " + path("t2.tsv")).code == 0);
    const std::string tsv = read_bytes(path("t1.tsv"));
    CHECK(tsv == read_bytes(path("t2.tsv")));
    std::size_t lines = 0;
    for (char c : tsv) lines += c == '\n';
    CHECK(lines == 14);
    CHECK(cli("tournament --methods gap,nope").code == 1);
    const Run timed = cli("tournament --d 8 --p 16 --methods gap,simpool --timing");
    CHECK(timed.out.rfind("method\tnorm\tdistortion\tentropy\tseconds\n", 0) == 0);
}

TEST_CASE("inspect") {
    write_npy(Mat(2, 3), path("z.npy"));
    const Run r = cli("inspect " + path("z.npy"));
    CHECK(r.code == 0);
    CHECK(r.out == "descr <f8\nfortran_order False\nshape (2, 3)\n");
}

} // TEST_SUITE
