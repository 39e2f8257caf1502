fn main() {
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr().lock());
    let code = teamplan::cli::run(std::env::args_os(), &mut teamplan::cli::Io { out: &mut out, err: &mut err });
    std::process::exit(code);
}
