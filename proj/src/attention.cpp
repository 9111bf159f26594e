#include "sgsa/attention.hpp"

#include <cmath>
#include <string>

namespace sgsa {

namespace {

void check_projection(const char* what, const Tensor& input, const Tensor& w) {
    if (input.cols() != w.rows())
        throw DimensionError(std::string(what) + ": input " + input.shape_str() + " does not match weights " +
                             w.shape_str());
}

void check_mask(const TemporalMask& mask, int query_rows, int key_rows) {
    if (mask.allowed.rows != query_rows || mask.allowed.cols != key_rows)
        throw DimensionError("score mask [" + std::to_string(mask.allowed.rows) + "x" +
                             std::to_string(mask.allowed.cols) + "] does not cover scores [" +
                             std::to_string(query_rows) + "x" + std::to_string(key_rows) + "]");
    for (int u = 0; u < query_rows; ++u) {
        bool any = false;
        for (int v = 0; v < key_rows && !any; ++v) any = mask.at(u, v);
        if (!any) throw ContractError("score mask row " + std::to_string(u) + " allows no entries");
    }
}

Tensor attention_with_values(const Tensor& q, const Tensor& k, const AttentionHead& head, const Tensor& vw,
                             const TemporalMask* score_mask) {
    check_projection("attention queries", q, head.w_q);
    check_projection("attention keys", k, head.w_k);
    if (head.w_q.cols() != head.w_k.cols())
        throw DimensionError("attention: w_q " + head.w_q.shape_str() + " and w_k " + head.w_k.shape_str() +
                             " disagree on score width");
    Tensor qw = matmul(q, head.w_q);
    Tensor kw = matmul(k, head.w_k);
    const int d_k = head.w_q.cols();
    Tensor scores = scale(matmul(qw, transpose(kw)), 1.0 / std::sqrt(static_cast<double>(d_k)));
    if (score_mask != nullptr) {
        check_mask(*score_mask, scores.rows(), scores.cols());
        scores = masked_fill(scores, score_mask->allowed, kMaskedScore);
    }
    return matmul(softmax_rows(scores), vw);
}

}  // namespace

Tensor scaled_self_attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionHead& head,
                             const TemporalMask* score_mask) {
    check_projection("attention values", v, head.w_v);
    if (k.rows() != v.rows())
        throw DimensionError("attention: keys " + k.shape_str() + " and values " + v.shape_str() +
                             " disagree on row count");
    Tensor vw = matmul(v, head.w_v);
    return attention_with_values(q, k, head, vw, score_mask);
}

Tensor sgsa_attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionHead& head,
                      const Tensor& a_star, const TemporalMask* score_mask) {
    const int s = v.cols();
    if (a_star.rows() != s || a_star.cols() != s)
        throw DimensionError("sgsa: A* is " + a_star.shape_str() + " but values are " + v.shape_str());
    if (head.w_q.rows() != s || head.w_q.cols() != s || head.w_k.rows() != s || head.w_k.cols() != s ||
        head.w_v.rows() != s || head.w_v.cols() != s)
        throw ContractError("sgsa: head projections must be " + std::to_string(s) + "x" + std::to_string(s) +
                            " (full model dimension)");
    if (k.rows() != v.rows())
        throw DimensionError("sgsa: keys " + k.shape_str() + " and values " + v.shape_str() +
                             " disagree on row count");
    Tensor vw = matmul(matmul(v, a_star), head.w_v);
    return attention_with_values(q, k, head, vw, score_mask);
}

Tensor multi_head(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionParams& params,
                  AttentionMode mode, const Tensor* a_star, const TemporalMask* score_mask) {
    const int h = params.head_count();
    if (h < 1) throw ContractError("multi_head: no heads");
    const int d_model = q.cols();
    if (mode == AttentionMode::sgsa) {
        if (a_star == nullptr) throw ContractError("multi_head: sgsa mode needs an adjacency matrix");
        for (const AttentionHead& head : params.heads)
            if (head.w_q.rows() != d_model || head.w_q.cols() != d_model)
                throw ContractError("multi_head: sgsa heads must keep the full model dimension");
        if (params.w_o.rows() != h * d_model)
            throw ContractError("multi_head: sgsa w_o must be (h*S)xS, got " + params.w_o.shape_str());
    } else {
        if (a_star != nullptr) throw ContractError("multi_head: baseline mode does not take an adjacency matrix");
        if (d_model % h != 0)
            throw ContractError("multi_head: head count " + std::to_string(h) + " does not divide model width " +
                                std::to_string(d_model));
        const int d_head = d_model / h;
        for (const AttentionHead& head : params.heads)
            if (head.w_q.cols() != d_head)
                throw ContractError("multi_head: baseline heads must project to d_model/h = " +
                                    std::to_string(d_head) + ", got " + head.w_q.shape_str());
    }
    std::vector<Tensor> outs;
    outs.reserve(h);
    for (const AttentionHead& head : params.heads) {
        outs.push_back(mode == AttentionMode::sgsa ? sgsa_attention(q, k, v, head, *a_star, score_mask)
                                                   : scaled_self_attention(q, k, v, head, score_mask));
    }
    Tensor cat = concat_cols(outs);
    check_projection("multi_head output projection", cat, params.w_o);
    return matmul(cat, params.w_o);
}

Tensor cross_attention(const Tensor& queries, const Tensor& memory, const AttentionParams& params) {
    if (params.head_count() < 1) throw ContractError("cross_attention: no heads");
    std::vector<Tensor> outs;
    outs.reserve(params.heads.size());
    for (const AttentionHead& head : params.heads) {
        if (queries.cols() != head.w_q.rows() || memory.cols() != head.w_k.rows())
            throw DimensionError("cross_attention: queries " + queries.shape_str() + " / memory " +
                                 memory.shape_str() + " do not match head weights " + head.w_q.shape_str() + "/" +
                                 head.w_k.shape_str());
        Tensor vw = matmul(memory, head.w_v);
        outs.push_back(attention_with_values(queries, memory, head, vw, nullptr));
    }
    Tensor cat = concat_cols(outs);
    check_projection("cross_attention output projection", cat, params.w_o);
    return matmul(cat, params.w_o);
}

}  // namespace sgsa
