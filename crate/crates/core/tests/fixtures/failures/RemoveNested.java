import java.io.*;
import java.lang.*;
import java.util.Arrays;

class RemoveNested {
    
    /*@ 
      @ requires testTup != null;
      @ requires (\forall int i; 0 <= i && i < testTup.length;
      @          testTup[i] == null ||
      @          testTup[i] instanceof Integer ||
      @          (testTup[i] instanceof Object[] &&
      @           (\forall int j; 0 <= j && j < ((Object[])testTup[i]).length;
      @            ((Object[])testTup[i])[j] == null ||
      @            ((Object[])testTup[i])[j] instanceof Integer)));
      @ ensures \result != null;
      @ ensures \result.length <= testTup.length;
      @ ensures (\forall int i; 0 <= i && i < \result.length; 
      @         (\exists int j; 0 <= j && j < testTup.length;
      @          testTup[j] instanceof Integer && \result[i] == (Integer)testTup[j]));
      @*/
    public static int[] removeNested(Object[] testTup) {
        int[] temp = new int[testTup.length];
        int count = 0;
        
        //@ maintaining 0 <= count && count <= testTup.length;
        //@ maintaining count <= temp.length;
        for (Object obj : testTup) {
            if (obj instanceof Object[]) {
                Object[] l = (Object[]) obj;
                for (Object e : l) {
                    if (e instanceof Integer) {
                    }
                }
            } else if (obj instanceof Integer) {
                temp[count++] = (Integer) obj;
            }
        }
        return Arrays.copyOf(temp, count);
    }
}
