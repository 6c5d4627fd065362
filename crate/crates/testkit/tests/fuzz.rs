use taskframe_testkit::run_campaign;

#[test]
fn generated_programs_agree_everywhere_and_traces_validate() {
    let stats = run_campaign(0..400).unwrap_or_else(|e| panic!("{e}"));
    assert!(stats.skipped * 4 < stats.programs, "{stats:?}");
    assert!(stats.steals > 0, "{stats:?}");
}
