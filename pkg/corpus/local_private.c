// expect: race_free
void *worker(void *p) {
  int mine = 0;
  mine = mine + 1;
  return NULL;
}
int main() {
  int x = 1;
  create(worker);
  create(worker);
  x = x + 1;
  return 0;
}
