// Keyword collection, stop filtering, annotation and featurization on a
// handful of posts.

use capsfusion::pipeline::{
    parse_corpus, prepare, resolve_features, Annotator, Encoding, KeywordList, NormStats,
};
use capsfusion::pipeline::featurize;

const CORPUS: &str = r#"{"id":"1","text":"I will not commit suicide","followers":120,"likes":4,"replies":1,"retweets":0}
{"id":"2","text":"I think about suicide every night, I feel hopeless","followers":45,"likes":2,"replies":6,"retweets":0}
{"id":"3","text":"suicide attack reported downtown https://news.example","followers":90000,"likes":300,"replies":12,"retweets":150}
{"id":"4","text":"my brother talks about suicide, he seems sad","followers":300,"likes":1,"replies":0,"retweets":0}
{"id":"5","text":"what a lovely morning","followers":10,"likes":3,"replies":0,"retweets":0}
{"id":"6","text":"من به خودکشی فکر میکنم و ناامیدم","followers":80,"likes":0,"replies":3,"retweets":0}
"#;

pub fn run_example() -> capsfusion::Result<()> {
    let load = parse_corpus(CORPUS);
    let annotator = Annotator::default();
    let prepared = prepare(load.records, &annotator, &KeywordList::default_stop());
    print!("{}", prepared.report.to_csv());
    for r in &prepared.stopped {
        println!("stopped  {}: {}", r.id, r.text);
    }

    let enc = Encoding::fit(&prepared.records, 1, &annotator.lexicons.sentiment);
    let stats: &NormStats = &enc.stats;
    for r in &prepared.records {
        let (label, reason) = annotator.explain(r);
        let f = featurize(&resolve_features(r, &annotator.lexicons.sentiment), stats)?;
        let fs: Vec<String> = f.data().iter().map(|x| format!("{x:.2}")).collect();
        println!("{:<8} {:<20} [{}]  {}", label.as_str(), format!("{reason:?}"), fs.join(", "), r.text);
    }
    Ok(())
}

fn main() -> capsfusion::Result<()> {
    run_example()
}
