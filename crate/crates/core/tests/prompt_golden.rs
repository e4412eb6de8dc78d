use jiragpt_core::llm::estimate_tokens;
use jiragpt_core::prompt::{BlockId, PromptKit, PromptTemplate, Variant};

#[test]
fn block_texts_match_golden_files() {
    let kit = PromptKit::bundled();
    let files = [
        (BlockId::P1B1, include_str!("golden/p1_b1.txt")),
        (BlockId::P1B2, include_str!("golden/p1_b2.txt")),
        (BlockId::P1B3, include_str!("golden/p1_b3.txt")),
        (BlockId::P1B4, include_str!("golden/p1_b4.txt")),
        (BlockId::P2, include_str!("golden/p2.txt")),
        (BlockId::P3, include_str!("golden/p3.txt")),
    ];
    for (id, want) in files {
        assert_eq!(kit.block(id).text, want, "{id:?}");
    }
}

#[test]
fn variants_join_blocks_with_blank_lines() {
    let kit = PromptKit::bundled();
    let full = kit.system_text(&PromptTemplate::phase1(Variant::Full));
    let parts: Vec<&str> = [BlockId::P1B1, BlockId::P1B2, BlockId::P1B3, BlockId::P1B4]
        .iter()
        .map(|id| kit.block(*id).text.as_str())
        .collect();
    assert_eq!(full, parts.join("\n\n"));
    let tokens: Vec<u64> = Variant::ALL
        .iter()
        .map(|v| estimate_tokens(&kit.system_text(&PromptTemplate::phase1(*v))))
        .collect();
    assert!(tokens.windows(2).all(|w| w[0] < w[1]), "{tokens:?}");
}
