//! Static file server for build output directories.

use std::fs::File;
use std::io::Write;
use std::path::{Component, Path, PathBuf};

use tiny_http::{Header, Method, Request, Response, Server, StatusCode};

use crate::args::ServeArgs;
use crate::error::{CliError, Result};

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).unwrap_or("") {
        "json" => "application/json",
        "html" => "text/html; charset=utf-8",
        "js" => "text/javascript",
        "css" => "text/css",
        "csv" => "text/csv",
        "png" => "image/png",
        "ppm" => "image/x-portable-pixmap",
        _ => "application/octet-stream",
    }
}

/// Maps a request URL onto a file below `root`. Parent components,
/// absolute segments and anything that is not a plain file are rejected.
pub fn resolve(root: &Path, url: &str) -> Option<PathBuf> {
    let path = url.split(['?', '#']).next().unwrap_or("");
    let mut out = root.to_path_buf();
    for part in Path::new(path.trim_start_matches('/')).components() {
        match part {
            Component::Normal(p) => out.push(p),
            Component::CurDir => {}
            _ => return None,
        }
    }
    if out.is_dir() {
        out.push("index.html");
    }
    out.is_file().then_some(out)
}

fn header(name: &str, value: &str) -> Header {
    Header::from_bytes(name.as_bytes(), value.as_bytes()).expect("static header is valid")
}

fn respond(root: &Path, request: Request) -> std::io::Result<()> {
    let cors = header("Access-Control-Allow-Origin", "*");
    if !matches!(request.method(), Method::Get | Method::Head) {
        return request.respond(Response::empty(StatusCode(405)).with_header(cors));
    }
    let Some(path) = resolve(root, request.url()) else {
        log::info!("404 {}", request.url());
        return request.respond(
            Response::from_string("not found")
                .with_status_code(404)
                .with_header(cors),
        );
    };
    log::info!("200 {}", request.url());
    let file = File::open(&path)?;
    let response = Response::from_file(file)
        .with_header(header("Content-Type", content_type(&path)))
        .with_header(cors);
    request.respond(response)
}

pub fn run(args: &ServeArgs) -> Result<()> {
    if !args.dir.is_dir() {
        return Err(CliError::Usage(format!(
            "{} is not a directory",
            args.dir.display()
        )));
    }
    let server = Server::http(&args.addr).map_err(|e| CliError::Server(e.to_string()))?;
    let addr = server
        .server_addr()
        .to_ip()
        .ok_or_else(|| CliError::Server("not listening on an IP address".into()))?;
    println!("serving {} at http://{addr}/", args.dir.display());
    std::io::stdout().flush().ok();
    for request in server.incoming_requests() {
        if let Err(e) = respond(&args.dir, request) {
            log::warn!("request failed: {e}");
        }
    }
    Ok(())
}
