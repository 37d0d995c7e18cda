from ghp.main import app

app(prog_name="ghp")
