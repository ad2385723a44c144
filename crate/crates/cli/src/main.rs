use clap::Parser;

fn main() -> anyhow::Result<()> {
    match scaffold_cli::run(scaffold_cli::Cli::parse()) {
        Err(e)
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            Ok(())
        }
        r => r,
    }
}
