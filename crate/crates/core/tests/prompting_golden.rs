use codesim::algolib::{entry, OracleInput, Style};
use codesim::prompting::{build_algorithm_prompt, build_prompt, render_cosm, PromptStyle, COSM_TEMPLATE};
use codesim::taskgen::{generate_pair, GenParams, Rendering, TaskFamily};

const EXPECTED_TEMPLATE: &str = "\"\"\"\n@code@\n# 1. Simulate the above program instruction by instruction.\n# 2. Report the trace of the program at the end of each iteration.\n# 3. Think step by step and reply with the output of the function for the following input: @input@.\n\"\"\"\n";

const NUMBERED: [&str; 3] = [
    "# 1. Simulate the above program instruction by instruction.",
    "# 2. Report the trace of the program at the end of each iteration.",
    "# 3. Think step by step and reply with the output of the function for the following input: ",
];

#[test]
fn template_asset_is_byte_exact() {
    assert_eq!(COSM_TEMPLATE.as_bytes(), EXPECTED_TEMPLATE.as_bytes());
}

#[test]
fn rendered_block_differs_only_in_the_placeholders() {
    let code = "a0=1\na0 += 2";
    let block = render_cosm(code, "None");
    let expected = EXPECTED_TEMPLATE.replace("@code@", code).replace("@input@", "None");
    assert_eq!(block, expected);
}

#[test]
fn sorting_bundle_embeds_the_block() {
    let mut p = GenParams::new(TaskFamily::Sorting).with_seed(12);
    p.algorithm = Some("bubble".into());
    p.style = Some(Style::Recursive);
    let inst = generate_pair(&p).unwrap();
    let bundle = build_prompt(&inst, Rendering::Synthetic, PromptStyle::Cosm).unwrap();
    let e = entry("bubble", Style::Recursive).unwrap();
    let args = e.arguments(&OracleInput::Vector(inst.sort_input.clone().unwrap()));
    let block = EXPECTED_TEMPLATE.replace("@code@", e.source_text).replace("@input@", &args);
    assert!(bundle.user_text.starts_with(&block));
    for line in NUMBERED {
        assert_eq!(bundle.user_text.matches(line).count(), 1);
    }
}

#[test]
fn classic_variant_bundle_embeds_the_block() {
    let e = entry("fibonacci", Style::Iterative).unwrap();
    let bundle = build_algorithm_prompt(e, &OracleInput::Integer(10), PromptStyle::Cosm).unwrap();
    let block = EXPECTED_TEMPLATE.replace("@code@", e.source_text).replace("@input@", "10");
    assert!(bundle.user_text.starts_with(&block));
}
