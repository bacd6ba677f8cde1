use std::process::Command;

fn regge_curv(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_regge-curv")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn converge_writes_csv_with_eoc_lines() {
    let dir = std::env::temp_dir().join(format!("regge-curv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("k1.csv");
    let p = path.to_str().unwrap();
    let (code, _, err) = regge_curv(&["converge", "--metric-degree", "1", "--levels", "0:2", "--out", p]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "level,h,ndof_metric,ndof_lift,err_L2_K,err_L2_Kw,err_Hm1_K,err_Hm1_Kw");
    assert_eq!(lines.len(), 1 + 3 + 4);
    let ndof: Vec<&str> = lines[1..4].iter().map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(ndof, ["4", "9", "25"]);
    assert!(lines[4].starts_with("# eoc_err_L2_K: "));
    let (_, again, _) = regge_curv(&["converge", "--metric-degree", "1", "--levels", "0:2"]);
    assert_eq!(again, text);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_configuration_exits_with_two() {
    let (code, _, err) = regge_curv(&["converge", "--metric-degree", "0", "--lift-offset", "0"]);
    assert_eq!(code, 2);
    assert!(err.contains("invalid configuration"), "{err}");
    let (code, _, _) = regge_curv(&["converge", "--metric-degree", "1", "--lift-offset", "-1"]);
    assert_eq!(code, 2);
    let (code, _, _) = regge_curv(&["converge", "--levels", "a:b"]);
    assert_eq!(code, 2);
}

#[test]
fn verify_passes_on_coarse_levels() {
    let (code, out, err) = regge_curv(&["verify", "--metric-degree", "1", "--levels", "0:1"]);
    assert_eq!(code, 0, "{out}{err}");
    assert_eq!(out.lines().filter(|l| l.contains(" PASS ")).count(), 10);
}

#[test]
fn dofs_lists_structured_dimensions() {
    let (code, out, _) = regge_curv(&["dofs", "--metric-degree", "3", "--levels", "0:2"]);
    assert_eq!(code, 0);
    let lift: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(lift, ["16", "49", "169"]);
}
